#pragma once

#include "perctrap/dynamics.hpp"
#include "perctrap/environment.hpp"
#include "perctrap/errors.hpp"
#include "perctrap/estimators.hpp"
#include "perctrap/lattice.hpp"
#include "perctrap/params.hpp"
#include "perctrap/random.hpp"
#include "perctrap/theory.hpp"
