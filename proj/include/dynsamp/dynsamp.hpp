#pragma once

#include "dynsamp/core.hpp"
#include "dynsamp/operator.hpp"
#include "dynsamp/spectral.hpp"
#include "dynsamp/construction.hpp"
#include "dynsamp/sampling.hpp"
#include "dynsamp/frames.hpp"
#include "dynsamp/io.hpp"
#include "dynsamp/scenario.hpp"
