#pragma once

#include "dcga/core.hpp"
#include "dcga/harness.hpp"
#include "dcga/model.hpp"
#include "dcga/operators.hpp"
#include "dcga/problems.hpp"
#include "dcga/solvers.hpp"
