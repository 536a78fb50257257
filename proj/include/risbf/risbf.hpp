#pragma once

// Umbrella header.

#include "risbf/ao.hpp"
#include "risbf/channel.hpp"
#include "risbf/channel_io.hpp"
#include "risbf/diagnostics.hpp"
#include "risbf/linalg.hpp"
#include "risbf/metrics.hpp"
#include "risbf/model.hpp"
#include "risbf/precoder_sca.hpp"
#include "risbf/rates.hpp"
#include "risbf/ris_spgm.hpp"
#include "risbf/rng.hpp"
#include "risbf/types.hpp"
