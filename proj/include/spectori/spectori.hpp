#pragma once

#include "core.hpp"
#include "polynomial.hpp"
#include "records.hpp"
#include "geometry.hpp"
#include "analytic.hpp"
#include "homology.hpp"
#include "periods.hpp"
#include "variation.hpp"
#include "search.hpp"
