#pragma once

#include "clarke_kkt/errors.hpp"
#include "clarke_kkt/expression.hpp"
#include "clarke_kkt/gendir.hpp"
#include "clarke_kkt/kkt.hpp"
#include "clarke_kkt/parser.hpp"
#include "clarke_kkt/problem.hpp"
#include "clarke_kkt/random.hpp"
#include "clarke_kkt/solver.hpp"
#include "clarke_kkt/subdiff.hpp"
#include "clarke_kkt/suite.hpp"
