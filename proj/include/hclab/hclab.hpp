#pragma once

#include "hclab/approx.hpp"
#include "hclab/compensated_sum.hpp"
#include "hclab/config.hpp"
#include "hclab/disks.hpp"
#include "hclab/error.hpp"
#include "hclab/formula.hpp"
#include "hclab/io.hpp"
#include "hclab/parallel.hpp"
#include "hclab/partition.hpp"
#include "hclab/polynomial.hpp"
#include "hclab/sequences.hpp"
#include "hclab/verify.hpp"
