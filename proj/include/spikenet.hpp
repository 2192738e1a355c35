#pragma once

#include "spikenet/bench.hpp"
#include "spikenet/checkpoint.hpp"
#include "spikenet/commands.hpp"
#include "spikenet/config.hpp"
#include "spikenet/error.hpp"
#include "spikenet/firing.hpp"
#include "spikenet/matrix.hpp"
#include "spikenet/net.hpp"
#include "spikenet/neuron.hpp"
#include "spikenet/rng.hpp"
#include "spikenet/sampler.hpp"
#include "spikenet/synth.hpp"
#include "spikenet/tgraph.hpp"
#include "spikenet/train.hpp"
