#pragma once

// Umbrella header: worst-case control under functionally constrained
// disturbances — identification-based full-memory strategies, grid value
// oracles, and closed-loop evaluation harnesses.

#include "guarctl/common.hpp"
#include "guarctl/sets.hpp"
#include "guarctl/partition.hpp"
#include "guarctl/signal.hpp"
#include "guarctl/trajectory.hpp"
#include "guarctl/dynamics.hpp"
#include "guarctl/integrate.hpp"
#include "guarctl/inversion.hpp"
#include "guarctl/oracle.hpp"
#include "guarctl/strategies.hpp"
#include "guarctl/evaluation.hpp"
#include "guarctl/example_bilinear.hpp"
#include "guarctl/expression.hpp"
#include "guarctl/config.hpp"
#include "guarctl/systems.hpp"
#include "guarctl/io.hpp"
#include "guarctl/commands.hpp"
