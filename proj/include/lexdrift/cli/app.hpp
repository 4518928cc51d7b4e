// Copyright 2026 The lexdrift Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The lexdrift command line. Lives in a header so tests can drive run()
// in-process; tools/lexdrift.cpp only forwards argv. Needs libcrypto.

#pragma once

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lexdrift/benchmark.hpp"
#include "lexdrift/common.hpp"
#include "lexdrift/corpus.hpp"
#include "lexdrift/divergence.hpp"
#include "lexdrift/mixture.hpp"
#include "lexdrift/tokenizer.hpp"

namespace lexdrift::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kIo = 2,
  kTraining = 3,
  kInsufficientData = 4,
  kMissingTask = 5,
  kInvalidInput = 6,
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingTaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- files -----------------------------------------------------------------

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) throw IoError(path, "is a directory");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  return buf.str();
}

// Writes via a temporary file in the same directory, then renames.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError(tmp.string(), "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(path.string(), "rename failed");
  }
}

// ---- run context -----------------------------------------------------------

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out_dir = ".";
  bool strict = false;
};

// Collects inputs and outputs of one command; commit() writes the outputs
// and then the manifest. Nothing touches the output directory before that.
class Run {
 public:
  Run(std::string command, const GlobalOptions& g) : command_(std::move(command)), g_(g) {}

  nlohmann::ordered_json& config() { return config_; }

  const std::string& input(const std::string& path) {
    inputs_.push_back({path, read_file(path)});
    return inputs_.back().content;
  }

  void output(std::string name, std::string content) { outputs_.push_back({std::move(name), std::move(content)}); }

  nlohmann::ordered_json manifest() const {
    nlohmann::ordered_json m;
    m["command"] = command_;
    m["config_digest"] = sha256_hex(config_.dump());
    m["config"] = config_;
    m["input_digests"] = nlohmann::ordered_json::array();
    for (const auto& in : inputs_) {
      m["input_digests"].push_back({{"path", in.path}, {"sha256", sha256_hex(in.content)}});
    }
    m["output_digests"] = nlohmann::ordered_json::array();
    for (const auto& out : outputs_) {
      m["output_digests"].push_back({{"path", out.name}, {"sha256", sha256_hex(out.content)}});
    }
    m["seed"] = g_.seed;
    m["tool_version"] = std::string(kToolVersion);
    return m;
  }

  void commit() const {
    const std::filesystem::path dir(g_.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError(g_.out_dir, "cannot create output directory");
    for (const auto& out : outputs_) write_atomic(dir / out.name, out.content);
    write_atomic(dir / (command_ + ".manifest.json"), manifest().dump(2) + "\n");
  }

 private:
  struct Input {
    std::string path;
    std::string content;
  };
  struct Output {
    std::string name;
    std::string content;
  };

  std::string command_;
  GlobalOptions g_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  std::vector<Input> inputs_;
  std::vector<Output> outputs_;
};

inline std::vector<Document> parse_corpus(const std::string& content, bool filter, bool strict) {
  std::istringstream in(content);
  return ingest(in, filter ? FilterConfig{} : FilterConfig::permissive(), strict).documents;
}

inline std::vector<std::string> texts_of(const std::vector<Document>& docs) {
  std::vector<std::string> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.text);
  return out;
}

inline Vocabulary parse_vocabulary(const std::string& content) {
  std::istringstream in(content);
  return Vocabulary::read(in);
}

// One example per line, whitespace-separated unsigned 32-bit ids.
inline std::vector<std::vector<TokenId>> parse_id_lines(const std::string& content) {
  std::vector<std::vector<TokenId>> out;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<TokenId> ids;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i == line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      std::uint32_t v = 0;
      const auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + j, v);
      if (ec != std::errc() || ptr != line.data() + j) {
        throw std::invalid_argument("ids line " + std::to_string(line_no) + ": bad token id '" +
                                    line.substr(i, j - i) + "'");
      }
      ids.push_back(v);
      i = j;
    }
    out.push_back(std::move(ids));
  }
  return out;
}

inline std::vector<std::vector<TokenId>> encode_documents(const Vocabulary& vocab, const std::vector<Document>& docs) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    const auto seg = viterbi_segment(vocab, d.text);
    out.emplace_back(seg.pieces.begin(), seg.pieces.end());
  }
  return out;
}

// ---- drift chart -----------------------------------------------------------

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Line chart of SKL and Jaccard distance per adjacent month pair.
inline std::string render_drift_svg(const DriftSeries& series) {
  constexpr double kW = 640, kH = 400, kL = 64, kR = 24, kT = 32, kB = 72;
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  double ymax = 1.0;
  for (const auto& p : series.pairs) ymax = std::max({ymax, p.report.skl, p.report.jaccard});
  ymax = std::ceil(ymax * 4.0) / 4.0;
  const std::size_t n = series.pairs.size();
  auto x_at = [&](std::size_t k) { return n < 2 ? kL + pw / 2 : kL + pw * static_cast<double>(k) / static_cast<double>(n - 1); };
  auto y_at = [&](double v) { return kT + ph * (1.0 - v / ymax); };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
    << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<line x1=\"" << kL << "\" y1=\"" << kT + ph << "\" x2=\"" << kL + pw << "\" y2=\"" << kT + ph
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kT + ph << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = ymax * k / 4.0;
    s << "<text x=\"" << kL - 6 << "\" y=\"" << fixed2(y_at(v) + 4) << "\" text-anchor=\"end\">" << fixed2(v)
      << "</text>\n";
  }
  for (std::size_t k = 0; k < n; ++k) {
    s << "<text x=\"" << fixed2(x_at(k)) << "\" y=\"" << kT + ph + 18 << "\" text-anchor=\"middle\">"
      << xml_escape(series.pairs[k].to) << "</text>\n";
  }
  s << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 28 << "\" text-anchor=\"middle\">month (compared with previous)</text>\n"
    << "<text x=\"16\" y=\"" << kT + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kT + ph / 2
    << ")\">divergence</text>\n";
  struct Line {
    const char* id;
    const char* label;
    const char* color;
    double DivergenceReport::*field;
  };
  const Line lines[] = {{"skl", "SKL", "#1f77b4", &DivergenceReport::skl},
                        {"jaccard", "Jaccard distance", "#d62728", &DivergenceReport::jaccard}};
  double legend_x = kL + 8;
  for (const auto& line : lines) {
    s << "<polyline id=\"" << line.id << "\" fill=\"none\" stroke=\"" << line.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < n; ++k) {
      s << (k ? " " : "") << fixed2(x_at(k)) << ',' << fixed2(y_at(series.pairs[k].report.*line.field));
    }
    s << "\"/>\n";
    s << "<line x1=\"" << legend_x << "\" y1=\"" << kH - 10 << "\" x2=\"" << legend_x + 20 << "\" y2=\"" << kH - 10
      << "\" stroke=\"" << line.color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << legend_x + 26 << "\" y=\"" << kH - 6 << "\">" << line.label << "</text>\n";
    legend_x += 160;
  }
  s << "</svg>\n";
  return s.str();
}

// ---- commands --------------------------------------------------------------

struct CorpusOptions {
  std::size_t vocab_size = 8000;
  double floor = kDefaultFloor;
  double coverage = 0.9995;
  std::size_t max_piece_length = 16;
  bool no_filter = false;

  TrainParams params(const GlobalOptions& g) const {
    TrainParams p;
    p.character_coverage = coverage;
    p.max_piece_length = max_piece_length;
    p.num_threads = std::max<std::size_t>(1, g.threads);
    return p;
  }

  void describe(nlohmann::ordered_json& c, bool with_floor) const {
    c["vocab_size"] = vocab_size;
    if (with_floor) c["floor"] = floor;
    c["character_coverage"] = coverage;
    c["max_piece_length"] = max_piece_length;
    c["filter"] = !no_filter;
  }
};

inline void add_corpus_options(CLI::App* sub, CorpusOptions& o, bool with_floor) {
  sub->add_option("--vocab-size", o.vocab_size, "Vocabulary size per trained tokenizer")->capture_default_str();
  if (with_floor) sub->add_option("--floor", o.floor, "Probability floor for unseen tokens")->capture_default_str();
  sub->add_option("--coverage", o.coverage, "Character coverage for training")->capture_default_str();
  sub->add_option("--max-piece-length", o.max_piece_length, "Longest piece, in characters")->capture_default_str();
  sub->add_flag("--no-filter", o.no_filter, "Keep media posts, URL posts and short texts");
}

inline std::vector<Document> require_documents(std::vector<Document> docs, const std::string& path) {
  if (docs.empty()) throw InsufficientDataError(path + ": no documents left after filtering");
  return docs;
}

inline int cmd_compare(const GlobalOptions& g, const std::string& a, const std::string& b, const CorpusOptions& o,
                       std::ostream& out) {
  Run run("compare", g);
  o.describe(run.config(), true);
  const auto docs_a = require_documents(parse_corpus(run.input(a), !o.no_filter, g.strict), a);
  const auto docs_b = require_documents(parse_corpus(run.input(b), !o.no_filter, g.strict), b);
  const auto report = compare_corpora(texts_of(docs_a), texts_of(docs_b), o.vocab_size, o.floor, o.params(g));
  const std::string json = report.to_json().dump(2) + "\n";
  run.output("compare.json", json);
  run.commit();
  out << json;
  return kOk;
}

inline int cmd_drift(const GlobalOptions& g, const std::string& path, const CorpusOptions& o, std::ostream& out) {
  Run run("drift", g);
  o.describe(run.config(), true);
  const auto docs = parse_corpus(run.input(path), !o.no_filter, g.strict);
  const auto months = segment_by_month(docs).size();
  if (months < 2) {
    throw InsufficientDataError(path + ": corpus spans " + std::to_string(months) +
                                " month(s); drift needs at least 2");
  }
  const auto series = corpus_drift(docs, o.vocab_size, o.floor, o.params(g));
  std::ostringstream csv;
  series.write_csv(csv);
  run.output("drift.csv", csv.str());
  run.output("drift.svg", render_drift_svg(series));
  run.commit();
  out << csv.str();
  return kOk;
}

inline int cmd_train(const GlobalOptions& g, const std::string& path, const CorpusOptions& o, std::ostream& out) {
  Run run("train-tokenizer", g);
  o.describe(run.config(), false);
  const auto docs = require_documents(parse_corpus(run.input(path), !o.no_filter, g.strict), path);
  const auto vocab = train_unigram(docs, o.vocab_size, o.params(g));
  run.output("vocab.tsv", vocab.serialize());
  run.commit();
  out << "vocab " << vocab.id() << " size=" << vocab.size() << "\n";
  return kOk;
}

inline int cmd_surgery(const GlobalOptions& g, const std::string& path, std::ostream& out) {
  Run run("surgery", g);
  const auto vocab = byte_fallback_surgery(parse_vocabulary(run.input(path)));
  run.output("vocab.byte_fallback.tsv", vocab.serialize());
  run.commit();
  out << "vocab " << vocab.id() << " size=" << vocab.size() << "\n";
  return kOk;
}

inline int cmd_freqdist(const GlobalOptions& g, const std::string& vocab_path, const std::string& corpus_path,
                        bool no_filter, std::ostream& out) {
  Run run("freqdist", g);
  run.config()["filter"] = !no_filter;
  const auto vocab = parse_vocabulary(run.input(vocab_path));
  const auto docs = parse_corpus(run.input(corpus_path), !no_filter, g.strict);
  const auto table = token_frequencies(vocab, docs);
  std::ostringstream tsv;
  table.write(tsv);
  run.output("freq.tsv", tsv.str());
  run.commit();
  out << "tokens " << table.total << " distinct " << table.nonzero() << "\n";
  return kOk;
}

struct MixOptions {
  std::string kind = "static";
  double ratio = 0.2;
  std::uint64_t steps = 0;
  std::uint64_t batch_size = 0;
};

inline int cmd_mix_plan(const GlobalOptions& g, const MixOptions& o, std::ostream& out) {
  Run run("mix-plan", g);
  const auto kind = parse_mix_kind(o.kind);
  if (!kind) throw std::invalid_argument("unknown schedule kind '" + o.kind + "' (static, sequential, dynamic)");
  run.config()["kind"] = std::string(to_string(*kind));
  run.config()["ratio_sm"] = o.ratio;
  run.config()["total_steps"] = o.steps;
  run.config()["batch_size"] = o.batch_size;
  const auto sched = make_schedule(*kind, o.ratio, o.steps);
  std::string csv = "step,n_c4,n_sm\n";
  std::uint64_t total_sm = 0;
  for (std::uint64_t k = 1; k <= o.steps; ++k) {
    const auto c = batch_counts(sched, k, o.batch_size);
    total_sm += c.n_sm;
    csv += std::to_string(k) + ',' + std::to_string(c.n_c4) + ',' + std::to_string(c.n_sm) + '\n';
  }
  run.output("mix_plan.csv", csv);
  run.commit();
  out << "steps " << o.steps << " sm_examples " << total_sm << " of " << o.steps * o.batch_size << "\n";
  return kOk;
}

struct SequenceInput {
  std::string path;
  std::string vocab;  // when set, `path` is a corpus and is tokenized
  bool no_filter = false;
};

inline std::vector<std::vector<TokenId>> load_sequences(Run& run, const GlobalOptions& g, const SequenceInput& in,
                                                        std::optional<Vocabulary>* vocab_out = nullptr) {
  run.config()["input_kind"] = in.vocab.empty() ? "ids" : "corpus";
  if (in.vocab.empty()) return parse_id_lines(run.input(in.path));
  run.config()["filter"] = !in.no_filter;
  auto vocab = parse_vocabulary(run.input(in.vocab));
  auto seqs = encode_documents(vocab, parse_corpus(run.input(in.path), !in.no_filter, g.strict));
  if (vocab_out) *vocab_out = std::move(vocab);
  return seqs;
}

inline void add_sequence_options(CLI::App* sub, SequenceInput& in) {
  sub->add_option("input", in.path, "Token ids (one sequence per line) or, with --vocab, a corpus JSONL")->required();
  sub->add_option("--vocab", in.vocab, "Vocabulary TSV used to tokenize a corpus input");
  sub->add_flag("--no-filter", in.no_filter, "Keep media posts, URL posts and short texts");
}

inline int cmd_pack(const GlobalOptions& g, const SequenceInput& in, std::size_t max_len, std::uint32_t pad_id,
                    std::ostream& out) {
  Run run("pack", g);
  run.config()["max_len"] = max_len;
  run.config()["pad_id"] = pad_id;
  const auto seqs = load_sequences(run, g, in);
  Packer packer(max_len);
  std::ostringstream bin;
  std::size_t n = 0, tokens = 0, pad = 0;
  auto emit = [&](const PackedSequence& s) {
    write_u32_record(bin, s.token_ids);
    ++n;
    tokens += s.token_ids.size();
    pad += s.pad_count;
  };
  for (const auto& s : seqs) {
    for (const auto& done : packer.add(s)) emit(done);
  }
  if (auto last = packer.finish()) emit(*last);
  nlohmann::ordered_json side;
  side["max_len"] = max_len;
  side["pad_id"] = pad_id;
  run.output("pack.bin", bin.str());
  run.output("pack.json", side.dump() + "\n");
  run.commit();
  out << "sequences " << n << " tokens " << tokens << " padding " << pad << "\n";
  return kOk;
}

struct CorruptOptions {
  double noise_density = kDefaultNoiseDensity;
  double mean_span = kDefaultMeanSpan;
  std::optional<std::uint32_t> sentinel_base;
};

inline int cmd_corrupt(const GlobalOptions& g, const SequenceInput& in, const CorruptOptions& o, std::ostream& out) {
  Run run("corrupt", g);
  run.config()["noise_density"] = o.noise_density;
  run.config()["mean_span"] = o.mean_span;
  std::optional<Vocabulary> vocab;
  const auto seqs = load_sequences(run, g, in, &vocab);
  std::uint32_t base = 0;
  if (o.sentinel_base) {
    base = *o.sentinel_base;
  } else if (vocab) {
    base = static_cast<std::uint32_t>(vocab->size());
  } else {
    throw std::invalid_argument("corrupt: --sentinel-base is required for id input");
  }
  run.config()["sentinel_base"] = base;
  std::string jsonl;
  std::size_t noise = 0, total = 0;
  for (std::size_t k = 0; k < seqs.size(); ++k) {
    const auto ex = span_corrupt(seqs[k], o.noise_density, o.mean_span, derive_seed(g.seed, k), base);
    nlohmann::ordered_json j;
    j["inputs"] = ex.inputs;
    j["targets"] = ex.targets;
    jsonl += j.dump() + "\n";
    noise += ex.noise_tokens;
    total += seqs[k].size();
  }
  run.output("corrupt.jsonl", jsonl);
  run.commit();
  out << "examples " << seqs.size() << " corrupted " << noise << " of " << total << "\n";
  return kOk;
}

inline std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Task files are <task>.jsonl, matched case-insensitively.
inline int cmd_score(const GlobalOptions& g, const std::string& dir, const std::string& registry_path,
                     std::ostream& out, std::ostream& err) {
  Run run("score", g);
  std::vector<TaskSpec> tasks = canonical_tasks();
  if (!registry_path.empty()) {
    const auto j = nlohmann::json::parse(run.input(registry_path));
    tasks = parse_registry(j);
  }
  run.config()["tasks"] = nlohmann::ordered_json::array();
  for (const auto& t : tasks) run.config()["tasks"].push_back(to_json(t));

  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError(dir, "not a directory");
  std::map<std::string, std::vector<std::string>> files;  // lowercase task name -> paths
  std::vector<std::filesystem::path> entries;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec)) entries.push_back(e.path());
  if (ec) throw IoError(dir, "cannot list directory");
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) {
    if (!std::filesystem::is_regular_file(p) || lowercase(p.extension().string()) != ".jsonl") continue;
    files[lowercase(p.stem().string())].push_back(p.string());
  }

  std::vector<std::string> missing, duplicate;
  for (const auto& t : tasks) {
    const auto it = files.find(lowercase(t.name));
    if (it == files.end()) {
      missing.push_back(t.name);
    } else if (it->second.size() > 1) {
      duplicate.push_back(t.name);
    }
  }
  for (const auto& [name, paths] : files) {
    const bool known = std::any_of(tasks.begin(), tasks.end(), [&](const TaskSpec& t) { return lowercase(t.name) == name; });
    if (!known) err << "lexdrift: warning: ignoring " << paths.front() << " (no such task)\n";
  }
  if (!missing.empty() || !duplicate.empty()) {
    std::string msg;
    auto list = [&](const char* what, const std::vector<std::string>& names) {
      if (names.empty()) return;
      msg += std::string(msg.empty() ? "" : "; ") + what + ":";
      for (const auto& n : names) msg += " " + n;
    };
    list("missing task files", missing);
    list("duplicate task files", duplicate);
    throw MissingTaskError(msg);
  }

  std::vector<TaskResult> results;
  for (const auto& t : tasks) {
    const std::string& path = files.at(lowercase(t.name)).front();
    std::istringstream in(run.input(path));
    try {
      const auto p = read_predictions(in);
      results.push_back(task_score(t, compute_metric(t, p.golds, p.preds)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ": " + e.what());
    }
  }
  const auto summary = summarize(results);
  const std::string json = summary.to_json().dump(2) + "\n";
  run.output("summary.json", json);
  run.commit();
  out << json;
  return kOk;
}

// ---- entry point -----------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Corpus divergence, tokenizer and pretraining data tools", "lexdrift"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--strict", g.strict, "Fail on the first malformed corpus line");

  std::string path_a, path_b, vocab_path, dir, registry;
  CorpusOptions co;
  bool no_filter = false;
  MixOptions mo;
  SequenceInput si;
  std::size_t max_len = 512;
  std::uint32_t pad_id = 0;
  CorruptOptions xo;

  auto* compare = app.add_subcommand("compare", "Divergence report between two corpora");
  compare->add_option("corpus_a", path_a, "Corpus JSONL")->required();
  compare->add_option("corpus_b", path_b, "Corpus JSONL")->required();
  add_corpus_options(compare, co, true);

  auto* drift = app.add_subcommand("drift", "Month-to-month divergence of one corpus");
  drift->add_option("corpus", path_a, "Corpus JSONL")->required();
  add_corpus_options(drift, co, true);

  auto* train = app.add_subcommand("train-tokenizer", "Train a unigram vocabulary");
  train->add_option("corpus", path_a, "Corpus JSONL")->required();
  add_corpus_options(train, co, false);

  auto* surgery = app.add_subcommand("surgery", "Replace the 256 rarest pieces with byte pieces");
  surgery->add_option("vocab", vocab_path, "Vocabulary TSV")->required();

  auto* freq = app.add_subcommand("freqdist", "Token frequencies of a corpus under a vocabulary");
  freq->add_option("vocab", vocab_path, "Vocabulary TSV")->required();
  freq->add_option("corpus", path_a, "Corpus JSONL")->required();
  freq->add_flag("--no-filter", no_filter, "Keep media posts, URL posts and short texts");

  auto* mix = app.add_subcommand("mix-plan", "Per-step batch composition of a two-corpus mixture");
  mix->add_option("--kind", mo.kind, "static, sequential or dynamic")->capture_default_str();
  mix->add_option("--ratio", mo.ratio, "Share of in-domain examples")->capture_default_str();
  mix->add_option("--steps", mo.steps, "Total steps")->required();
  mix->add_option("--batch-size", mo.batch_size, "Examples per batch")->required();

  auto* pack_cmd = app.add_subcommand("pack", "Pack token sequences into fixed-length records");
  add_sequence_options(pack_cmd, si);
  pack_cmd->add_option("--max-len", max_len, "Sequence length")->capture_default_str();
  pack_cmd->add_option("--pad-id", pad_id, "Padding id recorded in the sidecar")->capture_default_str();

  auto* corrupt = app.add_subcommand("corrupt", "Span-corruption inputs and targets");
  add_sequence_options(corrupt, si);
  corrupt->add_option("--noise-density", xo.noise_density, "Fraction of tokens corrupted")->capture_default_str();
  corrupt->add_option("--mean-span", xo.mean_span, "Mean corrupted span length")->capture_default_str();
  corrupt->add_option("--sentinel-base", xo.sentinel_base, "First sentinel id (default: vocabulary size)");

  auto* score = app.add_subcommand("score", "Summary scores from per-task prediction files");
  score->add_option("task_dir", dir, "Directory of <task>.jsonl prediction files")->required();
  score->add_option("--registry", registry, "Task registry JSON");

  std::vector<std::string> argv_store{"lexdrift"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "lexdrift: " << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    if (compare->parsed()) return cmd_compare(g, path_a, path_b, co, out);
    if (drift->parsed()) return cmd_drift(g, path_a, co, out);
    if (train->parsed()) return cmd_train(g, path_a, co, out);
    if (surgery->parsed()) return cmd_surgery(g, vocab_path, out);
    if (freq->parsed()) return cmd_freqdist(g, vocab_path, path_a, no_filter, out);
    if (mix->parsed()) return cmd_mix_plan(g, mo, out);
    if (pack_cmd->parsed()) return cmd_pack(g, si, max_len, pad_id, out);
    if (corrupt->parsed()) return cmd_corrupt(g, si, xo, out);
    if (score->parsed()) return cmd_score(g, dir, registry, out, err);
    return kInternal;
  } catch (const IoError& e) {
    err << "lexdrift: " << e.what() << "\n";
    return kIo;
  } catch (const TrainingError& e) {
    err << "lexdrift: training failed: " << e.what() << "\n";
    return kTraining;
  } catch (const InsufficientDataError& e) {
    err << "lexdrift: " << e.what() << "\n";
    return kInsufficientData;
  } catch (const MissingTaskError& e) {
    err << "lexdrift: " << e.what() << "\n";
    return kMissingTask;
  } catch (const std::invalid_argument& e) {
    err << "lexdrift: invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const nlohmann::json::exception& e) {
    err << "lexdrift: invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "lexdrift: internal error: " << e.what() << "\n";
    return kInternal;
  }
}

inline int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace lexdrift::cli
