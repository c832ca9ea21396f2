#pragma once

#include "orthant_lab/eig_bounds.hpp"
#include "orthant_lab/error.hpp"
#include "orthant_lab/fpt_sim.hpp"
#include "orthant_lab/io.hpp"
#include "orthant_lab/parallel.hpp"
#include "orthant_lab/random.hpp"
#include "orthant_lab/report.hpp"
#include "orthant_lab/spectral_s2.hpp"
#include "orthant_lab/sphere_geom.hpp"
#include "orthant_lab/volume_mc.hpp"
