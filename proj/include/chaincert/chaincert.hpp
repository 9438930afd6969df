// Umbrella header.
#pragma once

#include "chaincert/chaingraph.hpp"
#include "chaincert/errors.hpp"
#include "chaincert/geometry.hpp"
#include "chaincert/orbits.hpp"
#include "chaincert/random.hpp"
#include "chaincert/rational.hpp"
#include "chaincert/serialize.hpp"
#include "chaincert/shiftlab.hpp"
#include "chaincert/systems.hpp"
#include "chaincert/version.hpp"
