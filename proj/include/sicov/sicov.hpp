#pragma once

#include "sicov/compdb.hpp"
#include "sicov/coverage.hpp"
#include "sicov/diff.hpp"
#include "sicov/error.hpp"
#include "sicov/mangle.hpp"
#include "sicov/model.hpp"
#include "sicov/scan.hpp"
#include "sicov/sic.hpp"
