#pragma once

#include "mixbo/acquisition.hpp"
#include "mixbo/bench.hpp"
#include "mixbo/driver.hpp"
#include "mixbo/gp.hpp"
#include "mixbo/kernels.hpp"
#include "mixbo/log.hpp"
#include "mixbo/random.hpp"
#include "mixbo/metaopt.hpp"
#include "mixbo/space.hpp"
