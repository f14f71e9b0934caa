#include "srdf/datastore.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace srdf {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

namespace {

// Reads a header line plus records, reporting the source and line on error.
class LineReader {
 public:
  LineReader(std::string_view text, std::string source)
      : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::schema_violation,
                source_ + ":" + std::to_string(line_) + ": " + why);
  }

  // Next non-empty line parsed as JSON, or false at the end.
  bool next(json& out) {
    while (pos_ < text_.size()) {
      const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
      const std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (line.empty()) continue;
      try {
        out = json::parse(line);
      } catch (const json::exception& e) {
        fail(std::string("malformed record: ") + e.what());
      }
      return true;
    }
    return false;
  }

  // Consumes the header and returns the record count it announces.
  std::size_t header(std::string_view schema) {
    json h;
    if (!next(h)) fail("missing header line");
    if (!h.is_object() || !h.contains("schema") || h["schema"] != schema)
      fail("expected schema " + std::string(schema));
    return get<std::size_t>(h, "records");
  }

  template <typename T>
  T get(const json& j, const char* key) const {
    if (!j.is_object() || !j.contains(key)) fail(std::string("missing field '") + key + "'");
    try {
      return j.at(key).get<T>();
    } catch (const json::exception&) {
      fail(std::string("bad field '") + key + "'");
    }
  }

  void finish(std::size_t expected, std::size_t got) const {
    if (expected != got)
      fail("header announces " + std::to_string(expected) + " records, found " +
           std::to_string(got));
  }

 private:
  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::string header_line(std::string_view schema, std::size_t records) {
  json h;
  h["schema"] = schema;
  h["records"] = records;
  return h.dump() + "\n";
}

json traj_json(const Trajectory& t, bool with_env) {
  json j;
  j["traj_id"] = t.traj_id;
  if (with_env) j["env_id"] = t.env_id;
  j["nodes"] = t.nodes;
  j["headings"] = t.headings;
  json actions = json::array();
  for (const auto& a : t.actions) actions.push_back(action_to_string(a));
  j["actions"] = std::move(actions);
  return j;
}

Trajectory traj_from_json(const LineReader& r, const json& j, const std::string& env_id) {
  Trajectory t;
  t.traj_id = r.get<std::string>(j, "traj_id");
  t.env_id = env_id;
  t.nodes = r.get<std::vector<NodeId>>(j, "nodes");
  t.headings = r.get<std::vector<double>>(j, "headings");
  for (const auto& a : r.get<std::vector<std::string>>(j, "actions")) {
    try {
      t.actions.push_back(action_from_string(a));
    } catch (const Error& e) {
      r.fail(e.what());
    }
  }
  if (t.nodes.empty() || t.headings.size() != t.nodes.size() ||
      t.actions.size() != t.nodes.size())
    r.fail("trajectory '" + t.traj_id + "' has inconsistent lengths");
  return t;
}

json nav_scores_json(const NavScores& s) {
  return json{{"ne", s.ne},     {"sr", s.sr},     {"osr", s.osr},  {"spl", s.spl},
              {"dtw", s.dtw},   {"ndtw", s.ndtw}, {"sdtw", s.sdtw}};
}

json text_scores_json(const TextScores& s) {
  return json{{"bleu1", s.bleu1},     {"bleu4", s.bleu4},     {"rouge_l", s.rouge_l},
              {"cider", s.cider},     {"prop_f1", s.prop_f1}, {"prop_f1_dir", s.prop_f1_dir}};
}

}  // namespace

std::string pool_to_jsonl(const Pool& pool) {
  std::string out = header_line(kPoolSchema, pool.size());
  for (const auto& p : pool) {
    json j;
    j["pair_id"] = p.pair_id;
    j["env_id"] = p.env_id();
    j["traj"] = traj_json(*p.traj, false);
    j["instr"] = p.instr.text();
    j["provenance"] = p.provenance.to_string();
    if (p.scores) {
      json s;
      s["nav"] = nav_scores_json(p.scores->nav);
      if (p.scores->text) s["text"] = text_scores_json(*p.scores->text);
      s["navigator_version"] = p.scores->navigator_version;
      s["navigator_digest"] = p.scores->navigator_digest;
      j["scores"] = std::move(s);
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

Pool pool_from_jsonl(std::string_view text, const std::string& source) {
  LineReader r(text, source);
  const std::size_t expected = r.header(kPoolSchema);
  Pool pool;
  std::map<std::pair<std::string, std::string>, std::shared_ptr<const Trajectory>> shared;
  json j;
  while (r.next(j)) {
    PairedSample p;
    p.pair_id = r.get<std::string>(j, "pair_id");
    const auto env_id = r.get<std::string>(j, "env_id");
    if (!j.contains("traj")) r.fail("missing field 'traj'");
    Trajectory t = traj_from_json(r, j["traj"], env_id);
    auto& slot = shared[{env_id, t.traj_id}];
    if (!slot) {
      slot = std::make_shared<const Trajectory>(std::move(t));
    } else if (*slot != t) {
      r.fail("trajectory '" + t.traj_id + "' differs from an earlier record");
    }
    p.traj = slot;
    p.instr = Instruction::from_text(r.get<std::string>(j, "instr"));
    try {
      p.provenance = Provenance::parse(r.get<std::string>(j, "provenance"));
    } catch (const Error& e) {
      r.fail(e.what());
    }
    if (j.contains("scores")) {
      const json& s = j["scores"];
      PairScores ps;
      const json nav = r.get<json>(s, "nav");
      ps.nav = {r.get<double>(nav, "ne"),  r.get<double>(nav, "sr"),
                r.get<double>(nav, "osr"), r.get<double>(nav, "spl"),
                r.get<double>(nav, "dtw"), r.get<double>(nav, "ndtw"),
                r.get<double>(nav, "sdtw")};
      if (s.contains("text")) {
        const json& tx = s["text"];
        ps.text = TextScores{r.get<double>(tx, "bleu1"),   r.get<double>(tx, "bleu4"),
                             r.get<double>(tx, "rouge_l"), r.get<double>(tx, "cider"),
                             r.get<double>(tx, "prop_f1"), r.get<double>(tx, "prop_f1_dir")};
      }
      ps.navigator_version = r.get<int>(s, "navigator_version");
      ps.navigator_digest = r.get<std::string>(s, "navigator_digest");
      p.scores = std::move(ps);
    }
    pool.push_back(std::move(p));
  }
  r.finish(expected, pool.size());
  return pool;
}

void save_pool(const fs::path& path, const Pool& pool) {
  write_text_file(path, pool_to_jsonl(pool));
}

Pool load_pool(const fs::path& path) {
  return pool_from_jsonl(read_text_file(path), path.string());
}

std::string envs_to_jsonl(const EnvironmentSet& envs) {
  std::string out = header_line(kEnvSchema, envs.size());
  for (const auto& [id, env] : envs) {
    json j;
    j["env_id"] = id;
    j["split"] = split_name(env->split());
    j["rng_seed"] = env->rng_seed();
    json nodes = json::array();
    for (const auto& n : env->nodes()) {
      json landmarks = json::array();
      for (const auto& bucket : n.landmarks) landmarks.push_back(bucket);
      nodes.push_back(json{{"x", n.position.x}, {"y", n.position.y}, {"landmarks", landmarks}});
    }
    j["nodes"] = std::move(nodes);
    json edges = json::array();
    for (const auto& [a, b] : env->edges()) edges.push_back(json::array({a, b}));
    j["edges"] = std::move(edges);
    out += j.dump();
    out += '\n';
  }
  return out;
}

EnvironmentSet envs_from_jsonl(std::string_view text, const std::string& source) {
  LineReader r(text, source);
  const std::size_t expected = r.header(kEnvSchema);
  EnvironmentSet set;
  std::size_t count = 0;
  json j;
  while (r.next(j)) {
    const auto id = r.get<std::string>(j, "env_id");
    std::vector<Node> nodes;
    for (const auto& jn : r.get<json>(j, "nodes")) {
      Node n;
      n.id = static_cast<NodeId>(nodes.size());
      n.position = {r.get<double>(jn, "x"), r.get<double>(jn, "y")};
      const auto lm = r.get<std::vector<std::vector<LandmarkId>>>(jn, "landmarks");
      if (lm.size() != static_cast<std::size_t>(kSectorCount))
        r.fail("node needs " + std::to_string(kSectorCount) + " landmark sectors");
      for (int s = 0; s < kSectorCount; ++s) n.landmarks[s] = lm[s];
      nodes.push_back(std::move(n));
    }
    std::vector<Edge> edges;
    for (const auto& e : r.get<std::vector<std::array<NodeId, 2>>>(j, "edges"))
      edges.emplace_back(e[0], e[1]);
    try {
      set.add(Environment(id, parse_split(r.get<std::string>(j, "split")), std::move(nodes),
                          std::move(edges), r.get<std::uint64_t>(j, "rng_seed")));
    } catch (const Error& e) {
      r.fail(e.what());
    }
    ++count;
  }
  r.finish(expected, count);
  return set;
}

void save_envs(const fs::path& path, const EnvironmentSet& envs) {
  write_text_file(path, envs_to_jsonl(envs));
}

EnvironmentSet load_envs(const fs::path& path) {
  return envs_from_jsonl(read_text_file(path), path.string());
}

std::string trajs_to_jsonl(const std::vector<std::shared_ptr<const Trajectory>>& trajs) {
  std::string out = header_line(kTrajSchema, trajs.size());
  for (const auto& t : trajs) {
    out += traj_json(*t, true).dump();
    out += '\n';
  }
  return out;
}

std::vector<std::shared_ptr<const Trajectory>> trajs_from_jsonl(std::string_view text,
                                                                const std::string& source) {
  LineReader r(text, source);
  const std::size_t expected = r.header(kTrajSchema);
  std::vector<std::shared_ptr<const Trajectory>> out;
  json j;
  while (r.next(j))
    out.push_back(std::make_shared<const Trajectory>(
        traj_from_json(r, j, r.get<std::string>(j, "env_id"))));
  r.finish(expected, out.size());
  return out;
}

std::string navigator_to_text(const NavigatorParams& params) {
  params.validate();
  json j;
  j["version"] = params.version;
  json features = json::array();
  for (std::size_t i = 0; i < params.weights.size(); ++i)
    features.push_back(json{{"name", params.feature_names[i]}, {"weight", params.weights[i]}});
  j["features"] = std::move(features);
  return header_line(kNavigatorSchema, 1) + j.dump() + "\n";
}

NavigatorParams navigator_from_text(std::string_view text, const std::string& source) {
  LineReader r(text, source);
  const std::size_t expected = r.header(kNavigatorSchema);
  json j;
  if (!r.next(j)) r.fail("missing navigator record");
  NavigatorParams p;
  p.version = r.get<int>(j, "version");
  for (const auto& f : r.get<json>(j, "features")) {
    p.feature_names.push_back(r.get<std::string>(f, "name"));
    p.weights.push_back(r.get<double>(f, "weight"));
  }
  r.finish(expected, 1);
  try {
    p.validate();
  } catch (const Error& e) {
    r.fail(e.what());
  }
  return p;
}

std::string generator_to_text(const GeneratorParams& params) {
  params.validate();
  json j;
  j["version"] = params.version;
  j["encoding"] = encoding_name(params.encoding);
  j["landmark_vocab"] = params.landmark_vocab;
  j["alpha"] = params.alpha;
  j["backoff"] = params.backoff;
  json naming = json::array();
  for (const auto& n : params.naming) naming.push_back(n);
  j["naming"] = std::move(naming);
  json emission = json::object();
  for (const auto& [ctx, tmpls] : params.clause_emission) {
    json row = json::object();
    for (const auto& [tmpl, freq] : tmpls) row[tmpl] = freq;
    emission[ctx] = std::move(row);
  }
  j["clause_emission"] = std::move(emission);
  return header_line(kGeneratorSchema, 1) + j.dump() + "\n";
}

GeneratorParams generator_from_text(std::string_view text, const std::string& source) {
  LineReader r(text, source);
  const std::size_t expected = r.header(kGeneratorSchema);
  json j;
  if (!r.next(j)) r.fail("missing generator record");
  GeneratorParams p;
  p.version = r.get<int>(j, "version");
  try {
    p.encoding = parse_encoding(r.get<std::string>(j, "encoding"));
  } catch (const Error& e) {
    r.fail(e.what());
  }
  p.landmark_vocab = r.get<int>(j, "landmark_vocab");
  p.alpha = r.get<double>(j, "alpha");
  p.backoff = r.get<double>(j, "backoff");
  p.naming = r.get<std::vector<std::array<double, kSurfaceForms>>>(j, "naming");
  const json emission = r.get<json>(j, "clause_emission");
  for (const auto& [ctx, row] : emission.items())
    for (const auto& [tmpl, freq] : row.items()) {
      if (!freq.is_number()) r.fail("emission frequency is not a number");
      p.clause_emission[ctx][tmpl] = freq.get<double>();
    }
  r.finish(expected, 1);
  try {
    p.validate();
  } catch (const Error& e) {
    r.fail(e.what());
  }
  return p;
}

DatasetStats dataset_stats(const Pool& pool) {
  std::vector<InstructionRecord> records;
  records.reserve(pool.size());
  for (const auto& p : pool) records.push_back({&p.instr, &p.traj->env_id});
  return vocab_stats(records);
}

namespace {

constexpr std::pair<const char*, double RoundMetrics::*> kMetricFields[] = {
    {"ne", &RoundMetrics::ne},           {"osr", &RoundMetrics::osr},
    {"sr", &RoundMetrics::sr},           {"spl", &RoundMetrics::spl},
    {"ndtw", &RoundMetrics::ndtw},       {"sdtw", &RoundMetrics::sdtw},
    {"prop_f1", &RoundMetrics::prop_f1}, {"prop_f1_dir", &RoundMetrics::prop_f1_dir},
    {"bleu1", &RoundMetrics::bleu1},     {"bleu4", &RoundMetrics::bleu4},
    {"cider", &RoundMetrics::cider},     {"rouge_l", &RoundMetrics::rouge_l}};

}  // namespace

std::string reports_to_jsonl(const std::vector<RoundReport>& reports) {
  std::string out = header_line(kReportsSchema, reports.size());
  for (const auto& r : reports) {
    json j;
    j["label"] = r.label;
    j["round"] = r.round;
    json m;
    for (const auto& [name, field] : kMetricFields) m[name] = r.metrics.*field;
    j["metrics"] = std::move(m);
    json sizes = json::array();
    for (const auto& [name, n] : r.pool_sizes) sizes.push_back(json::array({name, n}));
    j["pool_sizes"] = std::move(sizes);
    json filters = json::array();
    for (const auto& f : r.filters)
      filters.push_back(json{{"stage", f.stage},
                             {"input", f.input},
                             {"kept", f.kept},
                             {"spl_exact", f.spl_exact},
                             {"ndtw_min", f.ndtw_min},
                             {"navigator_version", f.navigator_version}});
    j["filters"] = std::move(filters);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<RoundReport> reports_from_jsonl(std::string_view text, const std::string& source) {
  LineReader r(text, source);
  const std::size_t expected = r.header(kReportsSchema);
  std::vector<RoundReport> out;
  json j;
  while (r.next(j)) {
    RoundReport rep;
    rep.label = r.get<std::string>(j, "label");
    rep.round = r.get<int>(j, "round");
    const json m = r.get<json>(j, "metrics");
    for (const auto& [name, field] : kMetricFields) rep.metrics.*field = r.get<double>(m, name);
    rep.pool_sizes =
        r.get<std::vector<std::pair<std::string, std::size_t>>>(j, "pool_sizes");
    for (const auto& f : r.get<json>(j, "filters"))
      rep.filters.push_back({r.get<std::string>(f, "stage"), r.get<std::size_t>(f, "input"),
                             r.get<std::size_t>(f, "kept"), r.get<double>(f, "spl_exact"),
                             r.get<double>(f, "ndtw_min"), r.get<int>(f, "navigator_version")});
    out.push_back(std::move(rep));
  }
  r.finish(expected, out.size());
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

struct Column {
  const char* name;
  double RoundMetrics::*field;
};

constexpr Column kNavColumns[] = {
    {"NE", &RoundMetrics::ne},     {"OSR", &RoundMetrics::osr},   {"SR", &RoundMetrics::sr},
    {"SPL", &RoundMetrics::spl},   {"nDTW", &RoundMetrics::ndtw}, {"sDTW", &RoundMetrics::sdtw}};
constexpr Column kGenColumns[] = {{"prop_F1", &RoundMetrics::prop_f1},
                                  {"prop_F1_dir", &RoundMetrics::prop_f1_dir},
                                  {"BLEU-1", &RoundMetrics::bleu1},
                                  {"BLEU-4", &RoundMetrics::bleu4},
                                  {"CIDEr", &RoundMetrics::cider},
                                  {"ROUGE-L", &RoundMetrics::rouge_l}};

std::string cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::vector<std::vector<std::string>> report_rows(const std::vector<RoundReport>& reports) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"round"};
  for (const auto& c : kNavColumns) head.emplace_back(c.name);
  for (const auto& c : kGenColumns) head.emplace_back(c.name);
  rows.push_back(std::move(head));
  for (const auto& r : reports) {
    std::vector<std::string> row{r.label};
    for (const auto& c : kNavColumns) row.push_back(cell(r.metrics.*c.field));
    for (const auto& c : kGenColumns) row.push_back(cell(r.metrics.*c.field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string emit_report(const std::vector<RoundReport>& reports, ReportFormat format) {
  const auto rows = report_rows(reports);
  std::string out;
  if (format == ReportFormat::csv) {
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
      out += '\n';
    }
    return out;
  }
  constexpr std::size_t nav = std::size(kNavColumns);
  constexpr std::size_t gen = std::size(kGenColumns);
  out += "Instruction following: columns 2-" + std::to_string(1 + nav) +
         ". Instruction generation: columns " + std::to_string(2 + nav) + "-" +
         std::to_string(1 + nav + gen) + ".\n\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += '|';
    for (const auto& c : rows[r]) out += ' ' + c + " |";
    out += '\n';
    if (r == 0) {
      out += '|';
      for (std::size_t i = 0; i < rows[r].size(); ++i) out += i ? "---:|" : "---|";
      out += '\n';
    }
  }
  out +=
      "\nDirection reference at full scale (R2R val unseen): SR 82.4 -> 83.6 -> 84.4, "
      "SPL 75.9 -> 77.3 -> 77.6, SPICE 23.7 -> 25.2 -> 25.7 over rounds 1-3. "
      "Desk-scale values are not comparable in magnitude.\n";
  return out;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw Error(ErrorCode::invalid_argument, "bad value for " + key + ": '" + value + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v))
    throw Error(ErrorCode::invalid_argument, "bad value for " + key + ": '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorCode::invalid_argument, "bad value for " + key + ": '" + value + "'");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Key, getter and setter for every config field, in output order.
struct Field {
  const char* key;
  std::string (*get)(const RunConfig&);
  void (*set)(RunConfig&, const std::string& key, const std::string& value);
};

#define SRDF_INT_FIELD(name, expr)                                                     \
  Field{name, [](const RunConfig& c) { return std::to_string(c.expr); },              \
        [](RunConfig& c, const std::string& k, const std::string& v) {                \
          c.expr = parse_number<std::decay_t<decltype(c.expr)>>(k, v);                \
        }}
#define SRDF_REAL_FIELD(name, expr)                                                    \
  Field{name, [](const RunConfig& c) { return format_double(c.expr); },               \
        [](RunConfig& c, const std::string& k, const std::string& v) {                \
          c.expr = parse_real(k, v);                                                   \
        }}
#define SRDF_BOOL_FIELD(name, expr)                                                    \
  Field{name, [](const RunConfig& c) { return std::string(c.expr ? "true" : "false"); }, \
        [](RunConfig& c, const std::string& k, const std::string& v) {                \
          c.expr = parse_bool(k, v);                                                   \
        }}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      SRDF_INT_FIELD("master_seed", flywheel.master_seed),
      SRDF_INT_FIELD("rounds", flywheel.rounds),
      SRDF_INT_FIELD("k_sample", flywheel.k_sample),
      SRDF_INT_FIELD("sample_top_k", flywheel.sample_decode.k),
      SRDF_REAL_FIELD("sample_temperature", flywheel.sample_decode.temperature),
      SRDF_REAL_FIELD("spl_exact", flywheel.thresholds.spl_exact),
      SRDF_REAL_FIELD("ndtw_min", flywheel.thresholds.ndtw_min),
      SRDF_INT_FIELD("nav_pretrain_epochs", flywheel.nav_train.pretrain_epochs),
      SRDF_INT_FIELD("nav_finetune_epochs", flywheel.nav_train.finetune_epochs),
      SRDF_REAL_FIELD("nav_learning_rate", flywheel.nav_train.learning_rate),
      SRDF_REAL_FIELD("nav_l2", flywheel.nav_train.l2),
      SRDF_REAL_FIELD("gen_alpha", flywheel.gen_train.alpha),
      SRDF_REAL_FIELD("gen_backoff", flywheel.gen_train.backoff),
      SRDF_REAL_FIELD("gen_warm_start", flywheel.gen_train.warm_start),
      Field{"encoding",
            [](const RunConfig& c) { return std::string(encoding_name(c.flywheel.encoding)); },
            [](RunConfig& c, const std::string&, const std::string& v) {
              c.flywheel.encoding = parse_encoding(v);
            }},
      SRDF_BOOL_FIELD("baseline", flywheel.baseline),
      SRDF_BOOL_FIELD("finetune_generator_final", flywheel.finetune_generator_final),
      SRDF_INT_FIELD("train_worlds", data.worlds.train_worlds),
      SRDF_INT_FIELD("val_seen_worlds", data.worlds.val_seen_worlds),
      SRDF_INT_FIELD("val_unseen_worlds", data.worlds.val_unseen_worlds),
      SRDF_INT_FIELD("world_nodes", data.worlds.gen.nodes),
      SRDF_REAL_FIELD("world_mean_degree", data.worlds.gen.mean_degree),
      SRDF_INT_FIELD("landmark_vocab", data.worlds.gen.landmark_vocab),
      SRDF_REAL_FIELD("world_area_side", data.worlds.gen.area_side),
      SRDF_REAL_FIELD("world_min_separation", data.worlds.gen.min_separation),
      SRDF_REAL_FIELD("world_min_edge_angle", data.worlds.gen.min_edge_angle),
      SRDF_REAL_FIELD("world_extra_landmark_prob", data.worlds.gen.extra_landmark_prob),
      SRDF_INT_FIELD("seed_pairs", data.seed_pairs),
      SRDF_INT_FIELD("traj_pool", data.traj_pool),
      SRDF_INT_FIELD("hop_min", data.hops.min),
      SRDF_INT_FIELD("hop_max", data.hops.max),
      SRDF_INT_FIELD("eval_trajs_per_world", data.eval_trajs_per_world),
      SRDF_INT_FIELD("eval_refs", data.eval_refs),
      SRDF_REAL_FIELD("corruption_dropout", data.corruption.landmark_dropout),
      SRDF_REAL_FIELD("corruption_synonym", data.corruption.synonym_swap),
      SRDF_REAL_FIELD("corruption_spurious", data.corruption.spurious_insert),
      SRDF_REAL_FIELD("corruption_flip", data.corruption.direction_flip),
  };
  return f;
}

#undef SRDF_INT_FIELD
#undef SRDF_REAL_FIELD
#undef SRDF_BOOL_FIELD

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields())
    if (key == f.key) {
      f.set(*this, key, value);
      flywheel.landmark_vocab = data.worlds.gen.landmark_vocab;
      return;
    }
  throw Error(ErrorCode::invalid_argument, "unknown config key '" + key + "'");
}

RunConfig RunConfig::parse(std::string_view text, const std::string& source) {
  RunConfig c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos)
      throw Error(ErrorCode::invalid_argument, where + "expected key = value");
    try {
      c.set(trim(content.substr(0, eq)), trim(content.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::invalid_argument, where + e.what());
    }
  }
  return c;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(*this) + "\n";
  return out;
}

void RunConfig::validate() const {
  data.validate();
  flywheel.validate();
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::string RunManifest::to_text() const {
  json j;
  j["schema"] = kManifestSchema;
  j["run_id"] = run_id;
  j["config"] = config;
  json arts = json::array();
  for (const auto& a : artifacts)
    arts.push_back(json{{"role", a.role}, {"path", a.path}, {"sha256", a.sha256}});
  j["artifacts"] = std::move(arts);
  return j.dump(2) + "\n";
}

RunManifest RunManifest::parse(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_violation, source + ": malformed manifest: " + e.what());
  }
  LineReader r("", source);
  if (!j.is_object() || !j.contains("schema") || j["schema"] != kManifestSchema)
    throw Error(ErrorCode::schema_violation,
                source + ": expected schema " + std::string(kManifestSchema));
  RunManifest m;
  m.run_id = r.get<std::string>(j, "run_id");
  m.config = r.get<std::string>(j, "config");
  for (const auto& a : r.get<json>(j, "artifacts"))
    m.artifacts.push_back({r.get<std::string>(a, "role"), r.get<std::string>(a, "path"),
                           r.get<std::string>(a, "sha256")});
  return m;
}

void add_artifact(RunManifest& manifest, const fs::path& run_dir, const std::string& role,
                  const std::string& path) {
  manifest.artifacts.push_back({role, path, sha256_hex(read_text_file(run_dir / path))});
}

void verify_manifest(const RunManifest& manifest, const fs::path& run_dir) {
  for (const auto& a : manifest.artifacts) {
    const fs::path p = run_dir / a.path;
    if (!fs::exists(p)) throw Error(ErrorCode::io, "manifest file missing: " + a.path);
    if (sha256_hex(read_text_file(p)) != a.sha256)
      throw Error(ErrorCode::io, "manifest digest mismatch: " + a.path);
  }
}

}  // namespace srdf
