#pragma once

#include "mergeir/archive_io.hpp"
#include "mergeir/bm25.hpp"
#include "mergeir/encoder.hpp"
#include "mergeir/error.hpp"
#include "mergeir/evaluation.hpp"
#include "mergeir/experiment.hpp"
#include "mergeir/ir_data.hpp"
#include "mergeir/merge.hpp"
#include "mergeir/report.hpp"
#include "mergeir/retrieval.hpp"
#include "mergeir/rng.hpp"
#include "mergeir/tensor.hpp"
#include "mergeir/tokenizer.hpp"
#include "mergeir/toy_bundle.hpp"
#include "mergeir/toy_data.hpp"
