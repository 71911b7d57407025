#pragma once

#include "boson_owf/errors.hpp"
#include "boson_owf/rng.hpp"
#include "boson_owf/parallel.hpp"
#include "boson_owf/config_space.hpp"
#include "boson_owf/matrix.hpp"
#include "boson_owf/boson_dist.hpp"
#include "boson_owf/sampler.hpp"
#include "boson_owf/bootstrap.hpp"
#include "boson_owf/mpb_estimator.hpp"
#include "boson_owf/owf.hpp"
#include "boson_owf/security.hpp"
#include "boson_owf/stats.hpp"
#include "boson_owf/io.hpp"
#include "boson_owf/experiments.hpp"
