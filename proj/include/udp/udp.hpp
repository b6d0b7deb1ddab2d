#pragma once

#include "udp/error.hpp"
#include "udp/state.hpp"
#include "udp/marginal.hpp"
#include "udp/schmidt.hpp"
#include "udp/certifier.hpp"
#include "udp/hypergraph.hpp"
#include "udp/arrays.hpp"
#include "udp/experiment.hpp"
