#pragma once

#include "robustikit/core/compile.hpp"
#include "robustikit/core/error.hpp"
#include "robustikit/core/eval.hpp"
#include "robustikit/core/expr.hpp"
#include "robustikit/core/model.hpp"
#include "robustikit/core/semantics.hpp"
#include "robustikit/core/solver.hpp"
#include "robustikit/core/uncertainty.hpp"
#include "robustikit/core/value.hpp"
#include "robustikit/dsl/lexer.hpp"
#include "robustikit/dsl/parser.hpp"
#include "robustikit/dsl/printer.hpp"
#include "robustikit/analysis/checks.hpp"
#include "robustikit/analysis/controller.hpp"
#include "robustikit/analysis/parallel.hpp"
#include "robustikit/analysis/report.hpp"
#include "robustikit/analysis/smt.hpp"
#include "robustikit/transform/inject.hpp"
#include "robustikit/transform/eventb.hpp"
#include "robustikit/transform/robustify.hpp"
#include "robustikit/explore/simulate.hpp"
#include "robustikit/explore/sweep.hpp"
#include "robustikit/explore/workflow.hpp"
