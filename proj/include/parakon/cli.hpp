#pragma once

#include "parakon/cli/toml.hpp"
#include "parakon/cli/svg.hpp"
#include "parakon/cli/config.hpp"
#include "parakon/cli/experiments.hpp"
