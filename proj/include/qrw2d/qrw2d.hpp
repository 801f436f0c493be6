#pragma once
// Umbrella header.

#include "qrw2d/model.hpp"
#include "qrw2d/simulate.hpp"
#include "qrw2d/laurent.hpp"
#include "qrw2d/genfun.hpp"
#include "qrw2d/variety.hpp"
#include "qrw2d/asymptotics.hpp"
