// twindeph.hpp — Umbrella include

#pragma once

#include "twindeph/spectra.hpp"
#include "twindeph/channel.hpp"
#include "twindeph/analysis.hpp"
#include "twindeph/schedule.hpp"
#include "twindeph/fit.hpp"
#include "twindeph/synth.hpp"
#include "twindeph/io.hpp"
#include "twindeph/cli.hpp"
