#pragma once

#include "acoofdm/channel.hpp"
#include "acoofdm/constellation.hpp"
#include "acoofdm/ee_alloc.hpp"
#include "acoofdm/error.hpp"
#include "acoofdm/experiment.hpp"
#include "acoofdm/quadrature.hpp"
#include "acoofdm/rates.hpp"
#include "acoofdm/rng.hpp"
#include "acoofdm/se_alloc.hpp"
#include "acoofdm/types.hpp"
#include "acoofdm/waveform.hpp"
