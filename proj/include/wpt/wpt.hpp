#pragma once

#include "numerics.hpp"
#include "netmodel.hpp"
#include "random.hpp"
#include "mcsim.hpp"
#include "energy.hpp"
#include "throughput.hpp"
#include "config.hpp"
#include "experiment.hpp"
