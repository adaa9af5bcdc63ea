#pragma once

#include "treesurgeon/error.hpp"
#include "treesurgeon/scalar.hpp"
#include "treesurgeon/graph.hpp"
#include "treesurgeon/graph_io.hpp"
#include "treesurgeon/random.hpp"
#include "treesurgeon/linalg.hpp"
#include "treesurgeon/trees.hpp"
#include "treesurgeon/surgery.hpp"
#include "treesurgeon/polynomial.hpp"
#include "treesurgeon/coplanarity.hpp"
#include "treesurgeon/markov.hpp"
#include "treesurgeon/simulation.hpp"
#include "treesurgeon/fixtures.hpp"
#include "treesurgeon/report.hpp"
#include "treesurgeon/selftest.hpp"
