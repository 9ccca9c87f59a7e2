#include "chunkstore/evalbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "chunkstore/corpus.hpp"
#include "chunkstore/error.hpp"

namespace chunkstore {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

void StreamConfig::validate() const {
  if (!(warm_fraction > 0.0 && warm_fraction < 1.0)) {
    throw Error(Errc::kInvalidArgument, "warm_fraction must lie in (0, 1)");
  }
  if (update_block < 1 || report_block < 1) {
    throw Error(Errc::kInvalidArgument, "update_block and report_block must be >= 1");
  }
}

std::size_t StreamConfig::warm_count(std::size_t stream_size) const {
  return static_cast<std::size_t>(std::floor(warm_fraction * static_cast<double>(stream_size)));
}

StreamReport run_stream(const ModelInterface& model, Datastore& ds, Index& index,
                        const DecodeConfig& config, const StreamConfig& stream_config,
                        std::span<const SentencePair> stream) {
  stream_config.validate();
  const auto started = std::chrono::steady_clock::now();
  StreamReport report;
  report.warm_count = stream_config.warm_count(stream.size());
  if (report.warm_count >= stream.size()) {
    throw Error(Errc::kEmptyCorpus, "nothing left to translate after the warm prefix");
  }

  for (std::size_t begin = report.warm_count; begin < stream.size();
       begin += stream_config.update_block) {
    const std::size_t end = std::min(stream.size(), begin + stream_config.update_block);
    const auto block = stream.subspan(begin, end - begin);
    std::vector<TokenSeq> sources;
    sources.reserve(block.size());
    for (const auto& pair : block) sources.push_back(pair.source);

    const auto t_inf = std::chrono::steady_clock::now();
    auto translations = translate_batch(model, &index, config, sources);
    report.inference_ms += elapsed_ms(t_inf);
    std::move(translations.begin(), translations.end(), std::back_inserter(report.translations));

    // Appending after the final block cannot influence any translation.
    if (end < stream.size()) {
      const auto t_upd = std::chrono::steady_clock::now();
      append_examples(ds, model, block);
      index.refresh();
      StreamUpdate update;
      update.after = end;
      update.appended_pairs = block.size();
      for (const auto& pair : block) update.appended_tokens += pair.target.size();
      update.ms = elapsed_ms(t_upd);
      report.update_ms += update.ms;
      report.updates.push_back(update);
    }
  }

  const std::vector<TokenSeq> refs =
      references_of(std::vector<SentencePair>(stream.begin() + static_cast<std::ptrdiff_t>(report.warm_count),
                                              stream.end()));
  for (std::size_t begin = 0; begin < refs.size(); begin += stream_config.report_block) {
    const std::size_t end = std::min(refs.size(), begin + stream_config.report_block);
    std::vector<TokenSeq> hyps;
    for (std::size_t i = begin; i < end; ++i) hyps.push_back(report.translations[i].tokens);
    StreamBlock block;
    block.begin = report.warm_count + begin;
    block.end = report.warm_count + end;
    block.bleu = corpus_bleu(hyps, std::span<const TokenSeq>(refs).subspan(begin, end - begin));
    report.blocks.push_back(block);
  }
  report.total_ms = elapsed_ms(started);
  return report;
}

double BenchRow::searches_per_token() const {
  return totals.tokens == 0 ? 0.0
                            : static_cast<double>(totals.datastore_queries) /
                                  static_cast<double>(totals.tokens);
}

std::vector<BenchRow> bench(const ModelInterface& model, const Index* index,
                            std::span<const DecodeConfig> configs,
                            std::span<const std::string> labels,
                            std::span<const TokenSeq> sources) {
  if (!labels.empty() && labels.size() != configs.size()) {
    throw Error(Errc::kLengthMismatch, "one label per config expected");
  }
  std::vector<BenchRow> rows;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    BenchRow row;
    row.label = labels.empty() ? configs[i].strategy.describe() : labels[i];
    row.config = configs[i];
    row.sentences = sources.size();
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = translate_batch(model, index, configs[i], sources);
    const double wall = elapsed_ms(t0);
    for (const auto& tr : out) row.totals += tr.stats;
    row.totals.wall_ms = wall;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string machine_descriptor() {
  std::string cpu = "unknown cpu";
  std::ifstream info("/proc/cpuinfo");
  std::string line;
  while (std::getline(info, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  return cpu + ", " + std::to_string(std::max(1u, std::thread::hardware_concurrency())) +
         " hardware threads";
}

}  // namespace chunkstore
