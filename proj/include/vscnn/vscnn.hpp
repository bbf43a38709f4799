#pragma once

#include "vscnn/skeleton.hpp"
#include "vscnn/dataset.hpp"
#include "vscnn/synth.hpp"
#include "vscnn/encoder.hpp"
#include "vscnn/nn.hpp"
#include "vscnn/view_groups.hpp"
#include "vscnn/channels.hpp"
#include "vscnn/fusion.hpp"
#include "vscnn/model.hpp"
#include "vscnn/checkpoint.hpp"
#include "vscnn/trainer.hpp"
#include "vscnn/eval.hpp"
#include "vscnn/plots.hpp"
