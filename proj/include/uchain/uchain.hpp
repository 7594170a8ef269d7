#pragma once

#include "uchain/error.hpp"
#include "uchain/parallel.hpp"
#include "uchain/space.hpp"
#include "uchain/entourage.hpp"
#include "uchain/semigroup.hpp"
#include "uchain/systems.hpp"
#include "uchain/chain_graph.hpp"
#include "uchain/pseudo_orbit.hpp"
#include "uchain/shadowing.hpp"
#include "uchain/recurrence.hpp"
#include "uchain/system_io.hpp"
#include "uchain/driver.hpp"
