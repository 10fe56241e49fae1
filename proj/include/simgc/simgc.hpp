#pragma once

#include "simgc/core/dense.hpp"
#include "simgc/core/error.hpp"
#include "simgc/core/log.hpp"
#include "simgc/core/runtime.hpp"
#include "simgc/graph/sparse_graph.hpp"
#include "simgc/graph/propagation.hpp"
#include "simgc/graph/class_stats.hpp"
#include "simgc/graph/dataset.hpp"
#include "simgc/io/binary.hpp"
#include "simgc/io/dataset_io.hpp"
#include "simgc/io/synthetic.hpp"
#include "simgc/autodiff/tape.hpp"
#include "simgc/autodiff/ops.hpp"
#include "simgc/autodiff/optim.hpp"
#include "simgc/autodiff/gradcheck.hpp"
#include "simgc/sgc/model.hpp"
#include "simgc/sgc/pretrain.hpp"
#include "simgc/sgc/teacher_io.hpp"
#include "simgc/condense/condensed_graph.hpp"
#include "simgc/condense/losses.hpp"
#include "simgc/condense/run.hpp"
#include "simgc/condense/condensed_io.hpp"
#include "simgc/eval/models.hpp"
#include "simgc/eval/evaluate.hpp"
#include "simgc/cli/config.hpp"
#include "simgc/cli/commands.hpp"
