#pragma once

// Everything but the CLI layer.
#include "parakon/errors.hpp"
#include "parakon/linalg.hpp"
#include "parakon/means.hpp"
#include "parakon/geometry.hpp"
#include "parakon/grid_function.hpp"
#include "parakon/operators.hpp"
#include "parakon/transform.hpp"
#include "parakon/hypothesis.hpp"
#include "parakon/solver.hpp"
#include "parakon/envelope.hpp"
