#include "chunkstore/decode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>

#include "chunkstore/error.hpp"
#include "chunkstore/parallel.hpp"

namespace chunkstore {

std::string Strategy::describe() const {
  switch (kind) {
    case StrategyKind::kBase: return "base";
    case StrategyKind::kVanillaKnn: return "vanilla";
    case StrategyKind::kMaintainOrder: return "maintain_order";
    case StrategyKind::kCache: return "cache:" + std::string(to_string(scope));
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(const std::string& text) {
  if (text == "base") return Strategy::base();
  if (text == "vanilla") return Strategy::vanilla();
  if (text == "maintain_order") return Strategy::maintain_order();
  if (text == "cache") return Strategy::cache(CacheScope::kSentenceLevel);
  if (text.rfind("cache:", 0) == 0) {
    if (auto scope = parse_cache_scope(text.substr(6))) return Strategy::cache(*scope);
  }
  return std::nullopt;
}

void DecodeConfig::validate() const {
  if (beam_size < 1) throw Error(Errc::kInvalidArgument, "beam_size must be >= 1");
  if (max_len < 1) throw Error(Errc::kInvalidArgument, "max_len must be >= 1");
  if (batch_size < 1) throw Error(Errc::kInvalidArgument, "batch_size must be >= 1");
  mix.validate();
  schedule.validate();
}

double DecodeStats::tokens_per_sec() const {
  return wall_ms > 0.0 ? static_cast<double>(tokens) / (wall_ms / 1000.0) : 0.0;
}

DecodeStats& DecodeStats::operator+=(const DecodeStats& other) {
  tokens += other.tokens;
  steps += other.steps;
  datastore_searches += other.datastore_searches;
  datastore_queries += other.datastore_queries;
  cache_searches += other.cache_searches;
  cache_queries += other.cache_queries;
  wall_ms += other.wall_ms;
  return *this;
}

StateVector query_vector(std::span<const float> state, QuerySpace space, const Datastore& ds) {
  const PcaTransform& pca = space == QuerySpace::kKey ? ds.pca_key() : ds.pca_cache();
  return pca.apply(state);
}

RetrievedChunks RetrievedChunks::gather(std::span<const Neighbor> neighbors, const Datastore& ds,
                                        std::uint64_t position, std::uint32_t width) {
  RetrievedChunks out;
  out.position = position;
  out.width = std::min(width, ds.chunk_size());
  out.distances.reserve(neighbors.size());
  out.tokens.reserve(neighbors.size() * out.width);
  for (const Neighbor& n : neighbors) {
    out.distances.push_back(n.distance);
    const ChunkView chunk = ds.chunk(n.id);
    out.tokens.insert(out.tokens.end(), chunk.tokens.begin(),
                      chunk.tokens.begin() + out.width);
  }
  return out;
}

ProbDist chunk_offset_distribution(const ProbDist& p_model, const RetrievedChunks& chunks,
                                   std::size_t offset, double lambda, double temp) {
  if (offset >= chunks.width) return p_model;
  std::vector<ScoredToken> scored;
  scored.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const TokenId token = chunks.tokens[i * chunks.width + offset];
    if (token == kPad) continue;
    scored.push_back({chunks.distances[i], token});
  }
  if (scored.empty()) return p_model;
  return interpolate(p_model, retrieval_distribution(scored, temp), lambda);
}

ProbDist cache_step_distribution(const ProbDist& p_model, const NeighborsCache& cache,
                                 std::span<const float> cache_query, std::size_t k,
                                 double lambda, double temp) {
  if (cache.empty()) return p_model;
  const std::vector<Neighbor> hits = cache.search(cache_query, k);
  std::vector<ScoredToken> scored;
  scored.reserve(hits.size());
  for (const Neighbor& n : hits) scored.push_back({n.distance, cache.entry(n.id).value});
  return interpolate(p_model, retrieval_distribution(scored, temp), lambda);
}

StepResult step_distribution(const Strategy& strategy, const MixParams& mix,
                             const StepInputs& in) {
  const ProbDist& p_model = *in.p_model;
  switch (strategy.kind) {
    case StrategyKind::kBase:
      return {p_model, false};
    case StrategyKind::kVanillaKnn:
      return {chunk_offset_distribution(p_model, *in.chunks, 0, mix.lambda_ds, mix.temp_ds), false};
    case StrategyKind::kMaintainOrder: {
      const std::size_t offset = in.position - in.chunks->position;
      return {chunk_offset_distribution(p_model, *in.chunks, offset, mix.lambda_ds, mix.temp_ds),
              false};
    }
    case StrategyKind::kCache:
      if (in.retrieval_step) {
        return {chunk_offset_distribution(p_model, *in.chunks, 0, mix.lambda_ds, mix.temp_ds),
                false};
      }
      if (in.cache == nullptr || in.cache->empty()) return {p_model, false};
      return {cache_step_distribution(p_model, *in.cache, in.cache_query,
                                      static_cast<std::size_t>(mix.k), mix.lambda_cache,
                                      mix.temp_cache),
              true};
  }
  return {p_model, false};
}

namespace {

struct Hypothesis {
  TokenSeq prefix;  // starts with BOS
  double score = 0.0;
  std::shared_ptr<const RetrievedChunks> chunks;
  std::shared_ptr<const NeighborsCache> own_cache;  // kSingleChunk
};

struct SentenceJob {
  SourceContext ctx;
  std::size_t src_len = 0;
  ScheduleState schedule;
  std::vector<Hypothesis> active;
  std::vector<Hypothesis> finished;
  bool done = false;
  bool retrieval_now = false;
  DecodeStats stats;
};

struct StepWork {
  DecoderOutput out;
  std::vector<Neighbor> neighbors;
  StateVector cache_query;
};

struct Candidate {
  double score;
  std::size_t hyp;
  TokenId token;
};

class BatchDecoder {
 public:
  BatchDecoder(const ModelInterface& model, const Index* index, const DecodeConfig& config,
               const DecodeHooks& hooks, std::size_t first_sentence)
      : model_(model),
        index_(index),
        ds_(index ? &index->datastore() : nullptr),
        config_(config),
        hooks_(hooks),
        first_sentence_(first_sentence) {}

  std::vector<Translation> run(std::span<const TokenSeq> sources) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<SentenceJob> jobs;
    jobs.reserve(sources.size());
    for (const TokenSeq& src : sources) {
      if (src.size() > config_.max_source_len) {
        throw Error(Errc::kSourceTooLong, "source of length " + std::to_string(src.size()) +
                                              " exceeds " +
                                              std::to_string(config_.max_source_len));
      }
      SentenceJob job{model_.encode(src), src.size(), ScheduleState(config_.schedule, src.size()),
                      {}, {}, false, false, {}};
      job.active.push_back({{kBos}, 0.0, nullptr, nullptr});
      jobs.push_back(std::move(job));
    }

    work_.resize(jobs.size());
    const bool shared_cache = config_.strategy.kind == StrategyKind::kCache &&
                              config_.strategy.scope != CacheScope::kSingleChunk;
    if (shared_cache) {
      batch_cache_.emplace(config_.strategy.scope, ds_->d_cache(), config_.cache_capacity);
    }

    for (std::uint64_t t = 1; t <= config_.max_len; ++t) {
      bool any = false;
      for (std::size_t s = 0; s < jobs.size(); ++s) {
        if (!jobs[s].done) {
          any = true;
          step(jobs[s], s, t);
        }
      }
      if (!any) break;
      // Distributions are computed only after every sentence of the batch
      // has inserted this step's chunks into a shared cache.
      for (std::size_t s = 0; s < jobs.size(); ++s) {
        if (!jobs[s].done) expand(jobs[s], s, t);
      }
    }

    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    std::vector<Translation> out;
    out.reserve(jobs.size());
    std::uint64_t batch_tokens = 0;
    for (auto& job : jobs) out.push_back(finalize(job));
    for (const auto& tr : out) batch_tokens += tr.stats.tokens;
    for (auto& tr : out) {
      tr.stats.wall_ms = batch_tokens == 0
                             ? wall_ms / static_cast<double>(out.size())
                             : wall_ms * static_cast<double>(tr.stats.tokens) /
                                   static_cast<double>(batch_tokens);
    }
    return out;
  }

 private:
  bool is_retrieval_step(SentenceJob& job, std::uint64_t t) {
    switch (config_.strategy.kind) {
      case StrategyKind::kBase: return false;
      case StrategyKind::kVanillaKnn: return true;
      default: return job.schedule.fires(t);
    }
  }

  // Phase one: model outputs, datastore searches and cache insertions.
  void step(SentenceJob& job, std::size_t s, std::uint64_t t) {
    const bool retrieval = is_retrieval_step(job, t);
    job.retrieval_now = retrieval;
    job.stats.steps = t;
    auto& work = work_[s];
    work.assign(job.active.size(), {});
    const StrategyKind kind = config_.strategy.kind;
    std::uint32_t width = 1;
    if (retrieval && kind != StrategyKind::kVanillaKnn) {
      width = chunk_size_at(config_.schedule, ds_->chunk_size(), job.schedule.current_interval());
    }
    if (retrieval) ++job.stats.datastore_searches;
    const bool cache_step = !retrieval && kind == StrategyKind::kCache;
    if (cache_step) ++job.stats.cache_searches;

    std::vector<ChunkView> step_chunks;
    for (std::size_t h = 0; h < job.active.size(); ++h) {
      Hypothesis& hyp = job.active[h];
      StepWork& w = work[h];
      w.out = model_.decoder_step(job.ctx, hyp.prefix);
      if (retrieval) {
        const StateVector q = query_vector(w.out.state, QuerySpace::kKey, *ds_);
        w.neighbors = index_->search(q, static_cast<std::size_t>(config_.mix.k));
        ++job.stats.datastore_queries;
        hyp.chunks = std::make_shared<RetrievedChunks>(
            RetrievedChunks::gather(w.neighbors, *ds_, t,
                                    kind == StrategyKind::kMaintainOrder ? width : 1));
        if (kind == StrategyKind::kCache) {
          for (const Neighbor& n : w.neighbors) step_chunks.push_back(ds_->chunk(n.id));
          if (config_.strategy.scope == CacheScope::kSingleChunk) {
            auto own = std::make_shared<NeighborsCache>(CacheScope::kSingleChunk, ds_->d_cache(),
                                                        config_.cache_capacity);
            std::vector<ChunkView> mine;
            for (const Neighbor& n : w.neighbors) mine.push_back(ds_->chunk(n.id));
            own->insert_chunks(mine, *ds_, 0, width);
            hyp.own_cache = std::move(own);
          }
        }
      } else if (cache_step) {
        w.cache_query = query_vector(w.out.state, QuerySpace::kCache, *ds_);
        ++job.stats.cache_queries;
      }
    }
    if (retrieval && batch_cache_) {
      batch_cache_->insert_chunks(step_chunks, *ds_, static_cast<std::uint32_t>(s), width);
    }
  }

  // Phase two: final distributions and beam update.
  void expand(SentenceJob& job, std::size_t s, std::uint64_t t) {
    const auto& work = work_[s];
    const std::size_t beam = config_.beam_size;
    std::vector<Candidate> cands;
    for (std::size_t h = 0; h < job.active.size(); ++h) {
      const Hypothesis& hyp = job.active[h];
      const StepWork& w = work[h];
      const NeighborsCache* cache =
          batch_cache_ ? &*batch_cache_ : hyp.own_cache.get();
      StepInputs in;
      in.p_model = &w.out.p_model;
      in.retrieval_step = job.retrieval_now;
      in.position = t;
      in.chunks = hyp.chunks.get();
      in.cache = cache;
      in.cache_query = w.cache_query;
      const StepResult r = step_distribution(config_.strategy, config_.mix, in);
      if (hooks_.on_step) {
        StepTrace trace;
        trace.sentence = first_sentence_ + s;
        trace.position = t;
        trace.hypothesis = h;
        trace.retrieval_step = job.retrieval_now;
        trace.used_cache = r.used_cache;
        trace.prefix = &hyp.prefix;
        trace.state = &w.out.state;
        trace.p_model = &w.out.p_model;
        trace.dist = &r.dist;
        trace.cache = r.used_cache ? cache : nullptr;
        hooks_.on_step(trace);
      }
      for (const auto& [token, p] : r.dist.top(2 * beam)) {
        if (p <= 0.0) continue;
        cands.push_back({hyp.score + std::log(p), h, token});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.hyp != b.hyp) return a.hyp < b.hyp;
      return a.token < b.token;
    });

    std::vector<Hypothesis> next;
    for (std::size_t rank = 0; rank < cands.size() && next.size() < beam; ++rank) {
      const Candidate& c = cands[rank];
      const Hypothesis& parent = job.active[c.hyp];
      Hypothesis child{parent.prefix, c.score, parent.chunks, parent.own_cache};
      child.prefix.push_back(c.token);
      if (c.token == kEos) {
        if (rank < beam) job.finished.push_back(std::move(child));
      } else {
        next.push_back(std::move(child));
      }
    }
    job.active = std::move(next);

    double best_finished = -std::numeric_limits<double>::infinity();
    for (const auto& f : job.finished) best_finished = std::max(best_finished, f.score);
    const double best_active = job.active.empty() ? -std::numeric_limits<double>::infinity()
                                                  : job.active.front().score;
    // Scores never increase, so no active hypothesis can overtake a finished
    // one that already scores at least as well. Stopping on a count of
    // finished hypotheses instead would keep low-probability early EOS
    // candidates that happened to rank inside the beam.
    if (job.active.empty() || best_finished >= best_active) {
      job.done = true;
    }
  }

  Translation finalize(SentenceJob& job) {
    const Hypothesis* best = nullptr;
    for (const auto& f : job.finished) {
      if (!best || f.score > best->score) best = &f;
    }
    if (!best) {
      for (const auto& a : job.active) {
        if (!best || a.score > best->score) best = &a;
      }
    }
    Translation tr;
    tr.stats = job.stats;
    if (!best) return tr;
    tr.score = best->score;
    tr.finished = best->prefix.back() == kEos;
    tr.tokens.assign(best->prefix.begin() + 1, best->prefix.end() - (tr.finished ? 1 : 0));
    tr.stats.tokens = best->prefix.size() - 1;
    return tr;
  }

  const ModelInterface& model_;
  const Index* index_;
  const Datastore* ds_;
  const DecodeConfig& config_;
  const DecodeHooks& hooks_;
  std::size_t first_sentence_;
  std::optional<NeighborsCache> batch_cache_;
  std::vector<std::vector<StepWork>> work_;
};

}  // namespace

std::vector<Translation> translate_batch(const ModelInterface& model, const Index* index,
                                         const DecodeConfig& config,
                                         std::span<const TokenSeq> sources,
                                         const DecodeHooks& hooks) {
  config.validate();
  if (sources.empty()) throw Error(Errc::kInvalidArgument, "no sources to translate");
  if (config.strategy.kind != StrategyKind::kBase) {
    if (index == nullptr) throw Error(Errc::kInvalidArgument, "retrieval strategy without index");
    if (index->datastore().d_full() != model.state_dim()) {
      throw Error(Errc::kDimensionMismatch, "datastore and model state dimensions differ");
    }
  }
  for (const auto& src : sources) {
    if (src.empty()) throw Error(Errc::kInvalidArgument, "empty source sentence");
  }

  const std::size_t batch = config.batch_size;
  const std::size_t n_batches = (sources.size() + batch - 1) / batch;
  std::vector<Translation> out(sources.size());
  const std::size_t threads = hooks.threads == 0 ? thread_count() : hooks.threads;
  parallel_for(n_batches, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const std::size_t first = b * batch;
      const std::size_t count = std::min(batch, sources.size() - first);
      BatchDecoder decoder(model, index, config, hooks, first);
      auto results = decoder.run(sources.subspan(first, count));
      std::move(results.begin(), results.end(), out.begin() + static_cast<std::ptrdiff_t>(first));
    }
  });
  return out;
}

}  // namespace chunkstore
