#pragma once

// Umbrella header for the weakly-supervised video MIL toolkit.

#include "vmil/adam.hpp"
#include "vmil/attention.hpp"
#include "vmil/attention_viz.hpp"
#include "vmil/backbone.hpp"
#include "vmil/bag_split.hpp"
#include "vmil/checkpoint.hpp"
#include "vmil/config.hpp"
#include "vmil/gradcheck.hpp"
#include "vmil/heads.hpp"
#include "vmil/image_ops.hpp"
#include "vmil/label_set.hpp"
#include "vmil/losses.hpp"
#include "vmil/lstm.hpp"
#include "vmil/manifest.hpp"
#include "vmil/matrix_io.hpp"
#include "vmil/metrics.hpp"
#include "vmil/metrics_io.hpp"
#include "vmil/model.hpp"
#include "vmil/pipeline.hpp"
#include "vmil/rng.hpp"
#include "vmil/synth.hpp"
#include "vmil/trainer.hpp"
#include "vmil/types.hpp"
#include "vmil/video_bag.hpp"
