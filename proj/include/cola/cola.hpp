#pragma once

#include "cola/core/basket.hpp"
#include "cola/core/cross_section.hpp"
#include "cola/core/gauge.hpp"
#include "cola/core/level_set.hpp"
#include "cola/core/utility.hpp"
#include "cola/errors.hpp"
#include "cola/min_basket.hpp"
#include "cola/monotone_cubic.hpp"
#include "cola/rk4.hpp"
#include "cola/transport.hpp"
#include "cola/welfare.hpp"
