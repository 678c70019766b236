#pragma once

// Umbrella header for the pivot engine: translate-then-reason rollout
// parsing, n-gram translation metrics, segment-decoupled group-relative
// advantages, the clipped token-level surrogate, and the synthetic
// cipher-math environment used to exercise all of it.

#include "pivot/advantage.hpp"
#include "pivot/answer.hpp"
#include "pivot/commands.hpp"
#include "pivot/config.hpp"
#include "pivot/errors.hpp"
#include "pivot/io.hpp"
#include "pivot/jsonl.hpp"
#include "pivot/metrics.hpp"
#include "pivot/policy.hpp"
#include "pivot/reward.hpp"
#include "pivot/rng.hpp"
#include "pivot/simenv.hpp"
#include "pivot/surrogate.hpp"
#include "pivot/svg.hpp"
#include "pivot/text.hpp"
#include "pivot/train.hpp"
#include "pivot/trajectory.hpp"
