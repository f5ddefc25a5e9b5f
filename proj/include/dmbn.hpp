#pragma once

#include "dmbn/config.hpp"
#include "dmbn/error.hpp"
#include "dmbn/forecast.hpp"
#include "dmbn/gibbs.hpp"
#include "dmbn/gp_kernels.hpp"
#include "dmbn/metrics.hpp"
#include "dmbn/model.hpp"
#include "dmbn/network.hpp"
#include "dmbn/polya_gamma.hpp"
#include "dmbn/random.hpp"
#include "dmbn/synth.hpp"
#include "dmbn/tensor.hpp"
#include "dmbn/trace_io.hpp"
