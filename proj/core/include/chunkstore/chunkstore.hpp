#pragma once

#include "chunkstore/bleu.hpp"
#include "chunkstore/cache.hpp"
#include "chunkstore/corpus.hpp"
#include "chunkstore/datastore.hpp"
#include "chunkstore/decode.hpp"
#include "chunkstore/distance.hpp"
#include "chunkstore/error.hpp"
#include "chunkstore/evalbench.hpp"
#include "chunkstore/index.hpp"
#include "chunkstore/model.hpp"
#include "chunkstore/parallel.hpp"
#include "chunkstore/pca.hpp"
#include "chunkstore/prob_dist.hpp"
#include "chunkstore/schedule.hpp"
#include "chunkstore/synthetic.hpp"
#include "chunkstore/types.hpp"
