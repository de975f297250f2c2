#pragma once

#include "toboggan/errors.hpp"
#include "toboggan/critical_points.hpp"
#include "toboggan/contour.hpp"
#include "toboggan/winding.hpp"
#include "toboggan/spectral.hpp"
