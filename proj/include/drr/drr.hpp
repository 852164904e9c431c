#pragma once

#include "bench.hpp"
#include "dual.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "gradient.hpp"
#include "image.hpp"
#include "image_io.hpp"
#include "metrics.hpp"
#include "registration.hpp"
#include "report_io.hpp"
#include "siddon.hpp"
#include "volume.hpp"
#include "volume_io.hpp"
