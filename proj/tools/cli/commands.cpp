#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

namespace chunkstore::cli {

using Record = nlohmann::ordered_json;

namespace {

void emit(std::ostream& out, const Record& record) { out << record.dump() << '\n'; }

Vocab load_vocab(const RunConfig& c) {
  require_file("paths.vocab", c.paths.vocab);
  return Vocab::load(c.paths.vocab);
}

ToyModel load_model(const RunConfig& c) {
  require_file("paths.model", c.paths.model);
  return ToyModel::load(c.paths.model);
}

std::vector<SentencePair> load_pairs(const Vocab& vocab, const std::string& src_field,
                                     const std::string& src, const std::string& tgt_field,
                                     const std::string& tgt) {
  require_file(src_field, src);
  require_file(tgt_field, tgt);
  return encode_parallel(vocab, read_lines(src), read_lines(tgt));
}

// Datastore plus a search index over it; the datastore lives on the heap so
// the index reference stays valid when the bundle moves.
struct LoadedStore {
  std::unique_ptr<Datastore> ds;
  std::unique_ptr<Index> index;
};

std::unique_ptr<Index> make_index(const RunConfig& c, const Datastore& ds,
                                  std::optional<IvfIndex> stored = std::nullopt) {
  if (c.datastore.index == "flat") return std::make_unique<FlatIndex>(ds);
  auto ivf = stored ? std::move(*stored) : IvfIndex::build(ds, c.ivf_options());
  if (c.datastore.nprobe > 0) ivf.set_nprobe(c.datastore.nprobe);
  return std::make_unique<IvfIndex>(std::move(ivf));
}

LoadedStore load_store(const RunConfig& c) {
  require_file("paths.datastore", c.paths.datastore);
  LoadedStore s;
  s.ds = std::make_unique<Datastore>(Datastore::load(c.paths.datastore));
  std::optional<IvfIndex> stored;
  if (c.datastore.index == "ivf") stored = load_ivf(c.paths.datastore, *s.ds);
  s.index = make_index(c, *s.ds, std::move(stored));
  return s;
}

double sentence_bleu(const TokenSeq& hyp, const TokenSeq& ref) {
  std::vector<TokenSeq> h{hyp}, r{ref};
  return corpus_bleu(h, r).score;
}

Record config_record(const DecodeConfig& d) {
  return {{"strategy", d.strategy.describe()},
          {"schedule", d.schedule.describe()},
          {"k", d.mix.k},
          {"lambda", d.mix.lambda_ds},
          {"temp", d.mix.temp_ds},
          {"lambda_cache", d.mix.lambda_cache},
          {"temp_cache", d.mix.temp_cache},
          {"beam", d.beam_size},
          {"batch", d.batch_size}};
}

struct Evaluation {
  std::vector<TokenSeq> sources;
  std::vector<TokenSeq> references;  // empty without paths.test_target
};

Evaluation load_evaluation(const RunConfig& c, const Vocab& vocab) {
  require_file("paths.test_source", c.paths.test_source);
  Evaluation e;
  e.sources = encode_lines(vocab, read_lines(c.paths.test_source));
  if (!c.paths.test_target.empty()) {
    require_file("paths.test_target", c.paths.test_target);
    e.references = encode_lines(vocab, read_lines(c.paths.test_target));
    if (e.references.size() != e.sources.size()) {
      throw ConfigError("paths.test_target", "line count differs from paths.test_source");
    }
  }
  for (std::size_t i = 0; i < e.sources.size(); ++i) {
    if (e.sources[i].empty()) {
      throw ConfigError("paths.test_source", "blank line " + std::to_string(i + 1));
    }
  }
  return e;
}

void cmd_make_synthetic(const RunConfig& c, std::ostream& out, std::ostream& log) {
  require_path("paths.train_source", c.paths.train_source);
  require_path("paths.train_target", c.paths.train_target);
  PhraseDomainOptions o;
  o.name = c.synthetic.domain;
  o.source_words = c.synthetic.source_words;
  o.target_words = c.synthetic.target_words;
  o.phrases = c.synthetic.phrases;
  o.zipf = c.synthetic.zipf;
  o.seed = c.seed;
  PhraseDomain domain(o);
  auto write = [](const std::vector<TextPair>& pairs, const std::string& src,
                  const std::string& tgt) {
    std::vector<std::string> s, t;
    for (const auto& p : pairs) {
      s.push_back(p.source);
      t.push_back(p.target);
    }
    write_lines(src, s);
    write_lines(tgt, t);
  };
  write(domain.sample(c.synthetic.train_count, c.seed + 1), c.paths.train_source,
        c.paths.train_target);
  Record r{{"command", "make-synthetic"}, {"domain", o.name}, {"train", c.synthetic.train_count}};
  if (!c.paths.test_source.empty() && !c.paths.test_target.empty()) {
    write(domain.sample(c.synthetic.test_count, c.seed + 2), c.paths.test_source,
          c.paths.test_target);
    r["test"] = c.synthetic.test_count;
  }
  log << "wrote " << c.synthetic.train_count << " training pairs from domain " << o.name << '\n';
  emit(out, r);
}

void cmd_build_vocab(const RunConfig& c, std::ostream& out, std::ostream& log) {
  require_file("paths.train_source", c.paths.train_source);
  require_file("paths.train_target", c.paths.train_target);
  require_path("paths.vocab", c.paths.vocab);
  Vocab v = build_vocab({read_lines(c.paths.train_source), read_lines(c.paths.train_target)});
  v.save(c.paths.vocab);
  log << "vocabulary of " << v.size() << " types written to " << c.paths.vocab << '\n';
  emit(out, {{"command", "build-vocab"}, {"vocab_size", v.size()}});
}

void cmd_train_model(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const Vocab vocab = load_vocab(c);
  require_path("paths.model", c.paths.model);
  auto pairs = load_pairs(vocab, "paths.train_source", c.paths.train_source,
                          "paths.train_target", c.paths.train_target);
  ToyModelOptions o;
  o.seed = c.seed;
  o.alpha = c.model.alpha;
  o.d_full = c.model.d_full;
  const ToyModel model = train_toy(pairs, vocab.size(), o);
  model.save(c.paths.model);
  log << "model trained on " << pairs.size() << " pairs, saved to " << c.paths.model << '\n';
  emit(out, {{"command", "train-model"}, {"pairs", pairs.size()}, {"d_full", o.d_full}});
}

void cmd_build_datastore(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const Vocab vocab = load_vocab(c);
  const ToyModel model = load_model(c);
  require_path("paths.datastore", c.paths.datastore);
  const bool own = !c.paths.datastore_source.empty() || !c.paths.datastore_target.empty();
  auto pairs = own ? load_pairs(vocab, "paths.datastore_source", c.paths.datastore_source,
                                "paths.datastore_target", c.paths.datastore_target)
                   : load_pairs(vocab, "paths.train_source", c.paths.train_source,
                                "paths.train_target", c.paths.train_target);
  const Datastore ds = build_datastore(model, pairs, c.datastore_options());
  Record r{{"command", "build-datastore"},
           {"entries", ds.entry_count()},
           {"chunk_size", ds.chunk_size()},
           {"index", c.datastore.index}};
  if (c.datastore.index == "ivf") {
    const IvfIndex ivf = IvfIndex::build(ds, c.ivf_options());
    save_store(c.paths.datastore, ds, &ivf);
    r["n_clusters"] = ivf.n_clusters();
  } else {
    save_store(c.paths.datastore, ds);
  }
  log << "datastore of " << ds.entry_count() << " entries written to " << c.paths.datastore
      << '\n';
  emit(out, r);
}

void cmd_translate(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const DecodeConfig dc = c.decode_config();
  const Vocab vocab = load_vocab(c);
  const ToyModel model = load_model(c);
  LoadedStore store;
  if (dc.strategy.kind != StrategyKind::kBase) store = load_store(c);
  const Evaluation e = load_evaluation(c, vocab);
  DecodeHooks hooks;
  hooks.threads = c.threads;
  const auto result = translate_batch(model, store.index.get(), dc, e.sources, hooks);
  std::vector<std::string> lines;
  std::vector<TokenSeq> hyps;
  for (std::size_t i = 0; i < result.size(); ++i) {
    const auto& tr = result[i];
    Record r{{"id", i}, {"hypothesis", vocab.decode(tr.tokens)}};
    if (!e.references.empty()) r["bleu"] = sentence_bleu(tr.tokens, e.references[i]);
    r["tokens"] = tr.stats.tokens;
    r["ds_searches"] = tr.stats.datastore_searches;
    r["cache_searches"] = tr.stats.cache_searches;
    r["wall_ms"] = tr.stats.wall_ms;
    emit(out, r);
    lines.push_back(vocab.decode(tr.tokens));
    hyps.push_back(tr.tokens);
  }
  if (!c.paths.output.empty()) write_lines(c.paths.output, lines);
  log << "translated " << result.size() << " sentences with " << dc.strategy.describe();
  if (!e.references.empty()) {
    log << ", corpus BLEU " << std::fixed << std::setprecision(2)
        << corpus_bleu(hyps, e.references).score;
  }
  log << '\n';
}

void print_table(std::ostream& log, const std::vector<Record>& rows,
                 const std::vector<std::string>& columns) {
  std::vector<std::size_t> width;
  auto cell = [](const Record& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
      std::ostringstream s;
      s << std::fixed << std::setprecision(2) << v.get<double>();
      return s.str();
    }
    return v.dump();
  };
  for (const auto& col : columns) {
    std::size_t w = col.size();
    for (const auto& r : rows) w = std::max(w, r.contains(col) ? cell(r[col]).size() : 1);
    width.push_back(w);
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    log << std::left << std::setw(static_cast<int>(width[i]) + 2) << columns[i];
  }
  log << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      log << std::left << std::setw(static_cast<int>(width[i]) + 2)
          << (r.contains(columns[i]) ? cell(r[columns[i]]) : "-");
    }
    log << '\n';
  }
}

void cmd_bench(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const Vocab vocab = load_vocab(c);
  const ToyModel model = load_model(c);
  const DecodeConfig base = c.decode_config();
  std::vector<DecodeConfig> configs;
  std::vector<std::string> labels;
  bool needs_index = false;
  for (std::size_t i = 0; i < c.ablate.strategies.size(); ++i) {
    DecodeConfig d = base;
    d.strategy = strategy_from("ablate.strategies[" + std::to_string(i) + "]",
                               c.ablate.strategies[i]);
    needs_index |= d.strategy.kind != StrategyKind::kBase;
    configs.push_back(d);
    labels.push_back(d.strategy.describe());
  }
  LoadedStore store;
  if (needs_index) store = load_store(c);
  const Evaluation e = load_evaluation(c, vocab);
  const auto rows = bench(model, store.index.get(), configs, labels, e.sources);
  std::vector<Record> records;
  for (const auto& row : rows) {
    Record r{{"label", row.label},
             {"sentences", row.sentences},
             {"tokens", row.totals.tokens},
             {"ds_searches", row.totals.datastore_searches},
             {"ds_queries", row.totals.datastore_queries},
             {"cache_searches", row.totals.cache_searches},
             {"wall_ms", row.totals.wall_ms},
             {"tokens_per_sec", row.tokens_per_sec()},
             {"searches_per_token", row.searches_per_token()}};
    emit(out, r);
    records.push_back(r);
  }
  log << "machine: " << machine_descriptor() << '\n';
  print_table(log, records,
              {"label", "tokens", "ds_searches", "cache_searches", "tokens_per_sec",
               "searches_per_token", "wall_ms"});
}

void cmd_ablate(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const Vocab vocab = load_vocab(c);
  const ToyModel model = load_model(c);
  const DecodeConfig base = c.decode_config();
  bool needs_index = false;
  for (std::size_t i = 0; i < c.ablate.strategies.size(); ++i) {
    needs_index |= strategy_from("ablate.strategies[" + std::to_string(i) + "]",
                                 c.ablate.strategies[i])
                       .kind != StrategyKind::kBase;
  }
  LoadedStore store;
  if (needs_index) store = load_store(c);
  const Evaluation e = load_evaluation(c, vocab);
  DecodeHooks hooks;
  hooks.threads = c.threads;
  std::vector<Record> records;
  for (const auto& strategy : c.ablate.strategies) {
    for (const auto& schedule : c.ablate.schedules) {
      for (std::uint32_t k : c.ablate.k) {
        DecodeConfig d = base;
        d.strategy = strategy_from("ablate.strategies", strategy);
        const bool vary = d.schedule.vary_chunk;
        d.schedule = schedule_from("ablate.schedules", schedule);
        d.schedule.vary_chunk = vary;
        d.mix.k = static_cast<int>(k);
        const auto result = translate_batch(model, store.index.get(), d, e.sources, hooks);
        DecodeStats totals;
        std::vector<TokenSeq> hyps;
        for (const auto& tr : result) {
          totals += tr.stats;
          hyps.push_back(tr.tokens);
        }
        Record r{{"strategy", d.strategy.describe()},
                 {"schedule", d.schedule.describe()},
                 {"k", k}};
        if (!e.references.empty()) r["bleu"] = corpus_bleu(hyps, e.references).score;
        r["tokens"] = totals.tokens;
        r["ds_searches"] = totals.datastore_searches;
        r["cache_searches"] = totals.cache_searches;
        r["searches_per_token"] =
            totals.tokens == 0 ? 0.0
                               : static_cast<double>(totals.datastore_queries) /
                                     static_cast<double>(totals.tokens);
        r["tokens_per_sec"] = totals.tokens_per_sec();
        r["wall_ms"] = totals.wall_ms;
        emit(out, r);
        records.push_back(r);
      }
    }
  }
  print_table(log, records,
              {"strategy", "schedule", "k", "bleu", "searches_per_token", "tokens_per_sec"});
}

void cmd_onthefly(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const Vocab vocab = load_vocab(c);
  const ToyModel model = load_model(c);
  const DecodeConfig dc = c.decode_config();
  if (dc.strategy.kind == StrategyKind::kBase) {
    throw ConfigError("decode.strategy", "on-the-fly adaptation needs a retrieval strategy");
  }
  auto stream = load_pairs(vocab, "paths.test_source", c.paths.test_source, "paths.test_target",
                           c.paths.test_target);
  const StreamConfig sc = c.stream_config();
  const std::size_t warm = sc.warm_count(stream.size());
  if (warm == 0) throw ConfigError("onthefly.warm_fraction", "leaves an empty warm datastore");
  Datastore ds = build_datastore(model, std::span(stream).first(warm), c.datastore_options());
  auto index = make_index(c, ds);
  const StreamReport report = run_stream(model, ds, *index, dc, sc, stream);
  std::vector<Record> records;
  for (const auto& b : report.blocks) {
    Record r{{"type", "block"}, {"begin", b.begin}, {"end", b.end}, {"bleu", b.bleu.score}};
    emit(out, r);
    records.push_back(r);
  }
  emit(out, {{"type", "summary"},
             {"warm", report.warm_count},
             {"updates", report.updates.size()},
             {"entries", ds.entry_count()},
             {"update_ms", report.update_ms},
             {"inference_ms", report.inference_ms},
             {"total_ms", report.total_ms}});
  print_table(log, records, {"begin", "end", "bleu"});
}

using Handler = void (*)(const RunConfig&, std::ostream&, std::ostream&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table{
      {"make-synthetic", cmd_make_synthetic}, {"build-vocab", cmd_build_vocab},
      {"train-model", cmd_train_model},       {"build-datastore", cmd_build_datastore},
      {"translate", cmd_translate},           {"bench", cmd_bench},
      {"onthefly", cmd_onthefly},             {"ablate", cmd_ablate}};
  return table;
}

const char* describe_command(const std::string& name) {
  if (name == "make-synthetic") return "Write a synthetic phrase-domain corpus";
  if (name == "build-vocab") return "Build a vocabulary from the training corpus";
  if (name == "train-model") return "Train the count-based toy model";
  if (name == "build-datastore") return "Build a chunk datastore (and IVF index)";
  if (name == "translate") return "Translate paths.test_source, one JSON record per line";
  if (name == "bench") return "Throughput and search counters per strategy";
  if (name == "onthefly") return "Streaming adaptation simulator";
  if (name == "ablate") return "Strategy x schedule x k sweep, one JSON record per cell";
  return "";
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : handlers()) n.push_back(name);
    return n;
  }();
  return names;
}

void run_command(const std::string& name, const RunConfig& config, std::ostream& out,
                 std::ostream& log) {
  for (const auto& [n, fn] : handlers()) {
    if (n == name) {
      config.validate();
      fn(config, out, log);
      return;
    }
  }
  throw ConfigError("<command>", "unknown command " + name);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chunk-based retrieval-augmented translation toolkit", "chunkstore"};
  app.require_subcommand(1);

  std::string config_path;
  bool dump_config = false;
  Overrides ov;
  PathsSection paths;
  std::optional<std::uint64_t> threads;

  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_flag("--dump-config", dump_config, "Print the effective configuration and exit");
  app.add_option("--strategy", ov.strategy, "base | vanilla | maintain_order | cache:<scope>");
  app.add_option("--schedule", ov.schedule, "fixed:<i> | geometric:<i_min>:<i_max>");
  app.add_option("--i-min", ov.i_min, "Geometric schedule lower interval");
  app.add_option("--i-max", ov.i_max, "Geometric schedule upper interval");
  app.add_option("--chunk-size", ov.chunk_size, "Datastore chunk length c");
  app.add_option("--k", ov.k, "Neighbours per search");
  app.add_option("--lambda", ov.lambda, "Datastore interpolation weight");
  app.add_option("--temp", ov.temp, "Datastore softmax temperature");
  app.add_option("--lambda-cache", ov.lambda_cache, "Cache interpolation weight");
  app.add_option("--temp-cache", ov.temp_cache, "Cache softmax temperature");
  app.add_option("--beam", ov.beam, "Beam size");
  app.add_option("--batch", ov.batch, "Sentences per decode batch");
  app.add_option("--seed", ov.seed, "Seed for the model, k-means and synthetic data");
  app.add_option("--index", ov.index, "flat | ivf")->check(CLI::IsMember({"flat", "ivf"}));
  app.add_option("--nprobe", ov.nprobe, "IVF clusters probed per query");
  app.add_option("--threads", threads, "Decode worker threads");
  app.add_option("--vocab", paths.vocab, "paths.vocab");
  app.add_option("--model", paths.model, "paths.model");
  app.add_option("--datastore", paths.datastore, "paths.datastore");
  app.add_option("--train-src", paths.train_source, "paths.train_source");
  app.add_option("--train-tgt", paths.train_target, "paths.train_target");
  app.add_option("--ds-src", paths.datastore_source, "paths.datastore_source");
  app.add_option("--ds-tgt", paths.datastore_target, "paths.datastore_target");
  app.add_option("--test-src", paths.test_source, "paths.test_source");
  app.add_option("--test-tgt", paths.test_target, "paths.test_target");
  app.add_option("--output", paths.output, "paths.output");

  for (const auto& name : command_names()) {
    app.add_subcommand(name, describe_command(name))->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, x;
    const int code = app.exit(e, o, x);
    out << o.str();
    err << x.str();
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
    ov.apply(config);
    auto set = [](std::string& dst, const std::string& src) {
      if (!src.empty()) dst = src;
    };
    set(config.paths.vocab, paths.vocab);
    set(config.paths.model, paths.model);
    set(config.paths.datastore, paths.datastore);
    set(config.paths.train_source, paths.train_source);
    set(config.paths.train_target, paths.train_target);
    set(config.paths.datastore_source, paths.datastore_source);
    set(config.paths.datastore_target, paths.datastore_target);
    set(config.paths.test_source, paths.test_source);
    set(config.paths.test_target, paths.test_target);
    set(config.paths.output, paths.output);
    if (threads) config.threads = *threads;
    if (dump_config) {
      config.validate();
      out << config.to_json_text() << '\n';
      return 0;
    }
    run_command(app.get_subcommands().front()->get_name(), config, out, err);
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace chunkstore::cli
