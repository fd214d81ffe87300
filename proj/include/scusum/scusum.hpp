#pragma once

#include "scusum/detect.hpp"
#include "scusum/errors.hpp"
#include "scusum/graph_model.hpp"
#include "scusum/io.hpp"
#include "scusum/montecarlo.hpp"
#include "scusum/rng.hpp"
#include "scusum/spectral.hpp"
#include "scusum/theory.hpp"
