#pragma once

#include "conflap/errors.hpp"
#include "conflap/params.hpp"
#include "conflap/specfun.hpp"
#include "conflap/fft.hpp"
#include "conflap/sphere.hpp"
#include "conflap/cylinder.hpp"
#include "conflap/euclidean.hpp"
#include "conflap/extension.hpp"
#include "conflap/delaunay.hpp"
