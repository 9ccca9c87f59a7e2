#include "cli/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace chunkstore::cli {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(label(), "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  template <typename T>
  void unsigned_int(const std::string& key, T& out, std::uint64_t min = 0) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_unsigned()) {
      throw ConfigError(field(key), "expected a non-negative integer");
    }
    const auto value = v->get<std::uint64_t>();
    if (value < min || value > std::numeric_limits<T>::max()) {
      throw ConfigError(field(key), "value " + std::to_string(value) + " out of range");
    }
    out = static_cast<T>(value);
  }

  void real(const std::string& key, double& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number()) throw ConfigError(field(key), "expected a number");
    out = v->get<double>();
  }

  void string(const std::string& key, std::string& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    out = v->get<std::string>();
  }

  void boolean(const std::string& key, bool& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    out = v->get<bool>();
  }

  void strings(const std::string& key, std::vector<std::string>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) throw ConfigError(field(key), "expected an array of strings");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_string()) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a string");
      }
      out.push_back((*v)[i].get<std::string>());
    }
  }

  void uints(const std::string& key, std::vector<std::uint32_t>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) throw ConfigError(field(key), "expected an array of integers");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number_unsigned() || e.get<std::uint64_t>() > 0xffffffffu) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]",
                          "expected a non-negative integer");
      }
      out.push_back(e.get<std::uint32_t>());
    }
  }

  std::optional<ObjectReader> section(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return ObjectReader(*v, field(key));
  }

  void finish() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

 private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_schedule(ObjectReader& decode, ScheduleConfig& schedule) {
  const json* v = decode.find("schedule");
  if (!v) return;
  const std::string field = decode.field("schedule");
  if (v->is_string()) {
    schedule = schedule_from(field, v->get<std::string>());
    return;
  }
  ObjectReader r(*v, field);
  std::string mode = schedule.mode == ScheduleMode::kFixed ? "fixed" : "geometric";
  r.string("mode", mode);
  if (mode == "fixed") {
    schedule.mode = ScheduleMode::kFixed;
  } else if (mode == "geometric") {
    schedule.mode = ScheduleMode::kGeometric;
  } else {
    throw ConfigError(r.field("mode"), "expected \"fixed\" or \"geometric\"");
  }
  r.unsigned_int("interval", schedule.interval, 1);
  r.unsigned_int("i_min", schedule.i_min, 1);
  r.unsigned_int("i_max", schedule.i_max, 1);
  r.boolean("vary_chunk", schedule.vary_chunk);
  r.finish();
}

json schedule_json(const ScheduleConfig& s) {
  return {{"mode", s.mode == ScheduleMode::kFixed ? "fixed" : "geometric"},
          {"interval", s.interval},
          {"i_min", s.i_min},
          {"i_max", s.i_max},
          {"vary_chunk", s.vary_chunk}};
}

void check_lambda(const std::string& field, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(field, "must lie in [0, 1]");
}

void check_positive(const std::string& field, double v) {
  if (!(v > 0.0)) throw ConfigError(field, "must be positive");
}

}  // namespace

Strategy strategy_from(const std::string& field, const std::string& text) {
  auto s = parse_strategy(text);
  if (!s) {
    throw ConfigError(field, "unknown strategy \"" + text +
                                 "\" (base, vanilla, maintain_order, cache:<scope>)");
  }
  return *s;
}

ScheduleConfig schedule_from(const std::string& field, const std::string& text) {
  auto s = parse_schedule(text);
  if (!s) {
    throw ConfigError(field, "unknown schedule \"" + text +
                                 "\" (fixed:<i> or geometric:<i_min>:<i_max>)");
  }
  return *s;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  RunConfig c;
  ObjectReader root(doc, "");
  root.unsigned_int("seed", c.seed);
  root.unsigned_int("threads", c.threads);
  if (auto p = root.section("paths")) {
    p->string("vocab", c.paths.vocab);
    p->string("model", c.paths.model);
    p->string("datastore", c.paths.datastore);
    p->string("train_source", c.paths.train_source);
    p->string("train_target", c.paths.train_target);
    p->string("datastore_source", c.paths.datastore_source);
    p->string("datastore_target", c.paths.datastore_target);
    p->string("test_source", c.paths.test_source);
    p->string("test_target", c.paths.test_target);
    p->string("output", c.paths.output);
    p->finish();
  }
  if (auto m = root.section("model")) {
    m->unsigned_int("d_full", c.model.d_full, 1);
    m->real("alpha", c.model.alpha);
    m->finish();
  }
  if (auto d = root.section("datastore")) {
    d->unsigned_int("chunk_size", c.datastore.chunk_size, 1);
    d->unsigned_int("d_key", c.datastore.d_key, 1);
    d->unsigned_int("d_cache", c.datastore.d_cache, 1);
    d->unsigned_int("pca_sample", c.datastore.pca_sample, 1);
    d->string("index", c.datastore.index);
    d->unsigned_int("n_clusters", c.datastore.n_clusters);
    d->unsigned_int("nprobe", c.datastore.nprobe);
    d->unsigned_int("kmeans_iters", c.datastore.kmeans_iters, 1);
    d->finish();
  }
  if (auto d = root.section("decode")) {
    d->string("strategy", c.decode.strategy);
    d->unsigned_int("beam", c.decode.beam, 1);
    d->unsigned_int("batch", c.decode.batch, 1);
    d->unsigned_int("max_len", c.decode.max_len, 1);
    d->unsigned_int("max_source_len", c.decode.max_source_len, 1);
    d->unsigned_int("k", c.decode.k, 1);
    d->real("lambda", c.decode.lambda);
    d->real("temp", c.decode.temp);
    d->real("lambda_cache", c.decode.lambda_cache);
    d->real("temp_cache", c.decode.temp_cache);
    read_schedule(*d, c.decode.schedule);
    if (const json* cap = d->find("cache_capacity"); cap && !cap->is_null()) {
      if (!cap->is_number_unsigned() || cap->get<std::uint64_t>() == 0) {
        throw ConfigError(d->field("cache_capacity"), "expected a positive integer or null");
      }
      c.decode.cache_capacity = cap->get<std::uint64_t>();
    }
    d->finish();
  }
  if (auto o = root.section("onthefly")) {
    o->real("warm_fraction", c.onthefly.warm_fraction);
    o->unsigned_int("update_block", c.onthefly.update_block, 1);
    o->unsigned_int("report_block", c.onthefly.report_block, 1);
    o->finish();
  }
  if (auto a = root.section("ablate")) {
    a->strings("strategies", c.ablate.strategies);
    a->strings("schedules", c.ablate.schedules);
    a->uints("k", c.ablate.k);
    a->finish();
  }
  if (auto s = root.section("synthetic")) {
    s->string("domain", c.synthetic.domain);
    s->unsigned_int("source_words", c.synthetic.source_words, 1);
    s->unsigned_int("target_words", c.synthetic.target_words, 1);
    s->unsigned_int("phrases", c.synthetic.phrases, 1);
    s->real("zipf", c.synthetic.zipf);
    s->unsigned_int("train_count", c.synthetic.train_count, 1);
    s->unsigned_int("test_count", c.synthetic.test_count, 1);
    s->finish();
  }
  root.finish();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

std::string RunConfig::to_json_text() const {
  json decode_json = {{"strategy", decode.strategy},
                      {"beam", decode.beam},
                      {"batch", decode.batch},
                      {"max_len", decode.max_len},
                      {"max_source_len", decode.max_source_len},
                      {"k", decode.k},
                      {"lambda", decode.lambda},
                      {"temp", decode.temp},
                      {"lambda_cache", decode.lambda_cache},
                      {"temp_cache", decode.temp_cache},
                      {"schedule", schedule_json(decode.schedule)},
                      {"cache_capacity", nullptr}};
  if (decode.cache_capacity) decode_json["cache_capacity"] = *decode.cache_capacity;
  json doc = {
      {"seed", seed},
      {"threads", threads},
      {"paths",
       {{"vocab", paths.vocab},
        {"model", paths.model},
        {"datastore", paths.datastore},
        {"train_source", paths.train_source},
        {"train_target", paths.train_target},
        {"datastore_source", paths.datastore_source},
        {"datastore_target", paths.datastore_target},
        {"test_source", paths.test_source},
        {"test_target", paths.test_target},
        {"output", paths.output}}},
      {"model", {{"d_full", model.d_full}, {"alpha", model.alpha}}},
      {"datastore",
       {{"chunk_size", datastore.chunk_size},
        {"d_key", datastore.d_key},
        {"d_cache", datastore.d_cache},
        {"pca_sample", datastore.pca_sample},
        {"index", datastore.index},
        {"n_clusters", datastore.n_clusters},
        {"nprobe", datastore.nprobe},
        {"kmeans_iters", datastore.kmeans_iters}}},
      {"decode", decode_json},
      {"onthefly",
       {{"warm_fraction", onthefly.warm_fraction},
        {"update_block", onthefly.update_block},
        {"report_block", onthefly.report_block}}},
      {"ablate",
       {{"strategies", ablate.strategies}, {"schedules", ablate.schedules}, {"k", ablate.k}}},
      {"synthetic",
       {{"domain", synthetic.domain},
        {"source_words", synthetic.source_words},
        {"target_words", synthetic.target_words},
        {"phrases", synthetic.phrases},
        {"zipf", synthetic.zipf},
        {"train_count", synthetic.train_count},
        {"test_count", synthetic.test_count}}}};
  return doc.dump(2);
}

void RunConfig::validate() const {
  if (!(model.alpha > 0.0)) throw ConfigError("model.alpha", "must be positive");
  if (datastore.d_key > model.d_full) {
    throw ConfigError("datastore.d_key", "exceeds model.d_full");
  }
  if (datastore.d_cache > model.d_full) {
    throw ConfigError("datastore.d_cache", "exceeds model.d_full");
  }
  if (datastore.index != "flat" && datastore.index != "ivf") {
    throw ConfigError("datastore.index", "expected \"flat\" or \"ivf\"");
  }
  strategy_from("decode.strategy", decode.strategy);
  check_lambda("decode.lambda", decode.lambda);
  check_lambda("decode.lambda_cache", decode.lambda_cache);
  check_positive("decode.temp", decode.temp);
  check_positive("decode.temp_cache", decode.temp_cache);
  const auto& s = decode.schedule;
  if (s.mode == ScheduleMode::kFixed && s.interval < 1) {
    throw ConfigError("decode.schedule.interval", "must be >= 1");
  }
  if (s.mode == ScheduleMode::kGeometric && (s.i_min < 1 || s.i_min > s.i_max)) {
    throw ConfigError("decode.schedule", "needs 1 <= i_min <= i_max");
  }
  if (s.vary_chunk && s.mode == ScheduleMode::kGeometric && s.i_max > datastore.chunk_size) {
    throw ConfigError("decode.schedule.vary_chunk", "i_max exceeds datastore.chunk_size");
  }
  if (!(onthefly.warm_fraction > 0.0 && onthefly.warm_fraction < 1.0)) {
    throw ConfigError("onthefly.warm_fraction", "must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < ablate.strategies.size(); ++i) {
    strategy_from("ablate.strategies[" + std::to_string(i) + "]", ablate.strategies[i]);
  }
  for (std::size_t i = 0; i < ablate.schedules.size(); ++i) {
    schedule_from("ablate.schedules[" + std::to_string(i) + "]", ablate.schedules[i]);
  }
  for (std::size_t i = 0; i < ablate.k.size(); ++i) {
    if (ablate.k[i] < 1) throw ConfigError("ablate.k[" + std::to_string(i) + "]", "must be >= 1");
  }
  if (synthetic.zipf < 0.0) throw ConfigError("synthetic.zipf", "must be >= 0");
}

DecodeConfig RunConfig::decode_config() const {
  DecodeConfig c;
  c.beam_size = decode.beam;
  c.batch_size = decode.batch;
  c.max_len = decode.max_len;
  c.max_source_len = decode.max_source_len;
  c.mix.k = static_cast<int>(decode.k);
  c.mix.lambda_ds = decode.lambda;
  c.mix.temp_ds = decode.temp;
  c.mix.lambda_cache = decode.lambda_cache;
  c.mix.temp_cache = decode.temp_cache;
  c.schedule = decode.schedule;
  c.strategy = strategy_from("decode.strategy", decode.strategy);
  c.cache_capacity = decode.cache_capacity;
  return c;
}

DatastoreOptions RunConfig::datastore_options() const {
  DatastoreOptions o;
  o.chunk_size = datastore.chunk_size;
  o.d_key = datastore.d_key;
  o.d_cache = datastore.d_cache;
  o.pca_sample = datastore.pca_sample;
  o.threads = threads;
  return o;
}

IvfOptions RunConfig::ivf_options() const {
  IvfOptions o;
  o.n_clusters = datastore.n_clusters;
  o.nprobe = datastore.nprobe;
  o.seed = seed;
  o.kmeans_iters = datastore.kmeans_iters;
  return o;
}

StreamConfig RunConfig::stream_config() const {
  StreamConfig s;
  s.warm_fraction = onthefly.warm_fraction;
  s.update_block = onthefly.update_block;
  s.report_block = onthefly.report_block;
  return s;
}

void Overrides::apply(RunConfig& c) const {
  // A sweep flag narrows the ablate grid to that single value.
  if (strategy) {
    c.decode.strategy = *strategy;
    c.ablate.strategies = {*strategy};
  }
  if (schedule) {
    const bool vary = c.decode.schedule.vary_chunk;
    c.decode.schedule = schedule_from("--schedule", *schedule);
    c.decode.schedule.vary_chunk = vary;
    c.ablate.schedules = {*schedule};
  }
  if (i_min || i_max) {
    c.decode.schedule.mode = ScheduleMode::kGeometric;
    if (i_min) c.decode.schedule.i_min = *i_min;
    if (i_max) c.decode.schedule.i_max = *i_max;
  }
  if (chunk_size) c.datastore.chunk_size = *chunk_size;
  if (k) {
    c.decode.k = *k;
    c.ablate.k = {*k};
  }
  if (lambda) c.decode.lambda = *lambda;
  if (temp) c.decode.temp = *temp;
  if (lambda_cache) c.decode.lambda_cache = *lambda_cache;
  if (temp_cache) c.decode.temp_cache = *temp_cache;
  if (beam) c.decode.beam = *beam;
  if (batch) c.decode.batch = *batch;
  if (seed) c.seed = *seed;
  if (index) c.datastore.index = *index;
  if (nprobe) c.datastore.nprobe = *nprobe;
}

void require_path(const std::string& field, const std::string& path) {
  if (path.empty()) throw ConfigError(field, "required by this command but not set");
}

void require_file(const std::string& field, const std::string& path) {
  require_path(field, path);
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError(field, "file not found: " + path);
  }
}

}  // namespace chunkstore::cli
