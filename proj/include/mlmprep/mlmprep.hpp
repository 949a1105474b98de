#pragma once

#include "mlmprep/corpus.hpp"
#include "mlmprep/error.hpp"
#include "mlmprep/eval_metrics.hpp"
#include "mlmprep/lang_filter.hpp"
#include "mlmprep/parallel.hpp"
#include "mlmprep/pipeline.hpp"
#include "mlmprep/rng.hpp"
#include "mlmprep/sentence_chunker.hpp"
#include "mlmprep/text_clean.hpp"
#include "mlmprep/tokenizer.hpp"
#include "mlmprep/train_schedule.hpp"
#include "mlmprep/utf8.hpp"
#include "mlmprep/wwm_masker.hpp"
