#pragma once

#include "planarcav/design.hpp"
#include "planarcav/dipole.hpp"
#include "planarcav/errors.hpp"
#include "planarcav/fit.hpp"
#include "planarcav/materials.hpp"
#include "planarcav/models.hpp"
#include "planarcav/ple.hpp"
#include "planarcav/quadrature.hpp"
#include "planarcav/stratified.hpp"
#include "planarcav/synth.hpp"
