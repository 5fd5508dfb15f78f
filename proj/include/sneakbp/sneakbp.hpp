#pragma once

#include "sneakbp/channel.hpp"
#include "sneakbp/detector/baselines.hpp"
#include "sneakbp/detector/bp_detector.hpp"
#include "sneakbp/detector/detect.hpp"
#include "sneakbp/detector/graph.hpp"
#include "sneakbp/detector/labels.hpp"
#include "sneakbp/grid.hpp"
#include "sneakbp/harness/experiments.hpp"
#include "sneakbp/harness/parallel.hpp"
#include "sneakbp/harness/results.hpp"
#include "sneakbp/joint.hpp"
#include "sneakbp/polar/bp_decoder.hpp"
#include "sneakbp/polar/code_file.hpp"
#include "sneakbp/polar/code_spec.hpp"
#include "sneakbp/polar/construction.hpp"
#include "sneakbp/polar/encoder.hpp"
#include "sneakbp/polar/gena.hpp"
#include "sneakbp/random.hpp"
