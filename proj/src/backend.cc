#include "qeforge/backend.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <map>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "qeforge/errors.h"
#include "qeforge/hash.h"

namespace qeforge {
namespace {

constexpr const char* kBaseVocabulary[] = {
    "the",   "a",      "of",     "and",    "to",    "in",     "is",
    "was",   "that",   "for",    "it",     "with",  "as",     "on",
    "by",    "this",   "be",     "are",    "from",  "at",     "which",
    "or",    "an",     "has",    "had",    "not",   "but",    "were",
    "their", "also",   "one",    "its",    "first", "new",    "after",
    "two",   "who",    "they",   "have",   "her",   "she",    "he",
    "been",  "other",  "when",   "there",  "all",   "during", "into",
    "more",  "time",   "only",   "some",   "would", "city",   "world",
};
constexpr size_t kMockVocabularySize = 24;

uint64_t UniformBelow(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

double UniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::string> SplitSpaces(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string w;
  while (in >> w) out.push_back(std::move(w));
  return out;
}

std::map<std::string, std::string> ParseKeyValues(std::string_view body) {
  std::map<std::string, std::string> kv;
  size_t pos = 0;
  while (pos < body.size()) {
    size_t comma = body.find(',', pos);
    if (comma == std::string_view::npos) comma = body.size();
    std::string_view item = body.substr(pos, comma - pos);
    if (!item.empty()) {
      const size_t eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw InputError("backend option '" + std::string(item) +
                         "' is not key=value");
      }
      kv[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    }
    pos = comma + 1;
  }
  return kv;
}

double ToDouble(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::logic_error&) {
    throw InputError("backend option " + key + " is not a number: " + v);
  }
}

uint64_t ToUnsigned(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const uint64_t u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::logic_error&) {
    throw InputError("backend option " + key + " is not an integer: " + v);
  }
}

std::string FormatDouble(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

void CheckProbability(const char* name, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InputError(std::string("mock ") + name + " probability must be in [0, 1]");
  }
}

}  // namespace

// --- Direction ----------------------------------------------------------------

std::string Direction::Label() const {
  return kind == DirectionKind::kSourceToTarget
             ? langs.source + "-" + langs.target
             : langs.target + "-" + langs.source;
}

Direction Direction::Inverse() const {
  Direction d = *this;
  d.kind = kind == DirectionKind::kSourceToTarget ? DirectionKind::kTargetToSource
                                                  : DirectionKind::kSourceToTarget;
  return d;
}

// --- BackendSpec ----------------------------------------------------------------

BackendSpec BackendSpec::Parse(std::string_view text) {
  BackendSpec spec;
  const size_t colon = text.find(':');
  const std::string kind(text.substr(0, colon));
  const auto kv = ParseKeyValues(colon == std::string_view::npos
                                     ? std::string_view{}
                                     : text.substr(colon + 1));
  auto unknown = [&](const std::string& key) {
    throw InputError("unknown option '" + key + "' for " + kind + " backend");
  };
  if (kind == "mock") {
    spec.kind = Kind::kMock;
    for (const auto& [k, v] : kv) {
      if (k == "seed") spec.mock.seed = ToUnsigned(k, v);
      else if (k == "drop") spec.mock.drop = ToDouble(k, v);
      else if (k == "swap") spec.mock.swap = ToDouble(k, v);
      else if (k == "sub") spec.mock.substitute = ToDouble(k, v);
      else unknown(k);
    }
    CheckProbability("drop", spec.mock.drop);
    CheckProbability("swap", spec.mock.swap);
    CheckProbability("sub", spec.mock.substitute);
  } else if (kind == "file") {
    spec.kind = Kind::kFile;
    for (const auto& [k, v] : kv) {
      if (k == "src2tgt") spec.src2tgt_path = v;
      else if (k == "tgt2src") spec.tgt2src_path = v;
      else unknown(k);
    }
    if (spec.src2tgt_path.empty() && spec.tgt2src_path.empty()) {
      throw InputError("file backend needs src2tgt= and/or tgt2src=");
    }
  } else if (kind == "http") {
    spec.kind = Kind::kHttp;
    for (const auto& [k, v] : kv) {
      if (k == "url") spec.http.url = v;
      else if (k == "auth_header") spec.http.auth_header = v;
      else if (k == "token_env") spec.http.token_env = v;
      else if (k == "batch") spec.http.batch_size = ToUnsigned(k, v);
      else if (k == "timeout") spec.http.timeout_seconds = ToDouble(k, v);
      else if (k == "retries") spec.http.retries = static_cast<int>(ToUnsigned(k, v));
      else if (k == "backoff") spec.http.backoff_seconds = ToDouble(k, v);
      else if (k == "in_flight") spec.http.max_in_flight = ToUnsigned(k, v);
      else unknown(k);
    }
    if (spec.http.url.empty()) {
      if (const char* env = std::getenv("QEFORGE_MT_ENDPOINT")) spec.http.url = env;
    }
    if (spec.http.url.empty()) {
      throw InputError("http backend needs url= or QEFORGE_MT_ENDPOINT");
    }
    if (spec.http.batch_size == 0 || spec.http.max_in_flight == 0) {
      throw InputError("http batch and in_flight must be positive");
    }
  } else {
    throw InputError("unknown backend kind '" + kind + "' (mock|file|http)");
  }
  return spec;
}

std::string BackendSpec::ToString() const {
  switch (kind) {
    case Kind::kMock:
      return "mock:seed=" + std::to_string(mock.seed) +
             ",drop=" + FormatDouble(mock.drop) +
             ",swap=" + FormatDouble(mock.swap) +
             ",sub=" + FormatDouble(mock.substitute);
    case Kind::kFile: {
      std::string s = "file:";
      if (!src2tgt_path.empty()) s += "src2tgt=" + src2tgt_path;
      if (!tgt2src_path.empty()) {
        if (s.back() != ':') s += ',';
        s += "tgt2src=" + tgt2src_path;
      }
      return s;
    }
    case Kind::kHttp:
      return "http:url=" + http.url + ",auth_header=" + http.auth_header +
             ",token_env=" + http.token_env +
             ",batch=" + std::to_string(http.batch_size) +
             ",timeout=" + FormatDouble(http.timeout_seconds) +
             ",retries=" + std::to_string(http.retries) +
             ",backoff=" + FormatDouble(http.backoff_seconds) +
             ",in_flight=" + std::to_string(http.max_in_flight);
  }
  return {};
}

// --- MockBackend -------------------------------------------------------------------

MockBackend::MockBackend(MockOptions options) : options_(options) {
  std::vector<std::string> base(std::begin(kBaseVocabulary),
                                std::end(kBaseVocabulary));
  std::mt19937_64 rng(Fnv1a64("vocabulary", options_.seed));
  for (size_t i = 0; i < kMockVocabularySize; ++i) {
    const size_t j = i + UniformBelow(rng, base.size() - i);
    std::swap(base[i], base[j]);
  }
  vocabulary_.assign(base.begin(), base.begin() + kMockVocabularySize);
}

std::string MockBackend::TranslateLine(const std::string& line,
                                       const Direction& direction) const {
  std::vector<std::string> tokens = SplitSpaces(line);
  std::mt19937_64 rng(Fnv1a64(direction.Label() + '\n' + line, options_.seed));
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (auto& t : tokens) {
    if (UniformUnit(rng) < options_.drop) continue;
    if (UniformUnit(rng) < options_.substitute) {
      kept.push_back(vocabulary_[UniformBelow(rng, vocabulary_.size())]);
    } else {
      kept.push_back(std::move(t));
    }
  }
  for (size_t i = 0; i + 1 < kept.size(); ++i) {
    if (UniformUnit(rng) < options_.swap) {
      std::swap(kept[i], kept[i + 1]);
      ++i;
    }
  }
  std::string out;
  for (size_t i = 0; i < kept.size(); ++i) {
    if (i) out += ' ';
    out += kept[i];
  }
  return out;
}

TranslationBatch MockBackend::TranslateBatch(std::span<const std::string> lines,
                                             const Direction& direction,
                                             std::span<const size_t> /*line_nos*/) {
  TranslationBatch out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.emplace_back(TranslateLine(l, direction));
  return out;
}

// --- FileBackend ------------------------------------------------------------------

FileBackend::FileBackend(std::string src2tgt_path, std::string tgt2src_path) {
  src2tgt_.path = std::move(src2tgt_path);
  tgt2src_.path = std::move(tgt2src_path);
  for (Cursor* c : {&src2tgt_, &tgt2src_}) {
    if (c->path.empty()) continue;
    c->in.open(c->path);
    if (!c->in) throw InputError("cannot read translation table " + c->path);
  }
}

std::optional<std::string> FileBackend::Lookup(Cursor& c, size_t line_no) {
  if (line_no <= c.last_line_no) {
    c.in.clear();
    c.in.seekg(0);
    c.peeked.reset();
    c.last_line_no = 0;
  }
  while (true) {
    if (!c.peeked) {
      std::string raw;
      if (!std::getline(c.in, raw)) return std::nullopt;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      const size_t tab = raw.find('\t');
      if (tab == std::string::npos) {
        throw InputError("translation table " + c.path +
                         ": line without TAB separator");
      }
      size_t n = 0;
      try {
        n = std::stoull(raw.substr(0, tab));
      } catch (const std::logic_error&) {
        throw InputError("translation table " + c.path + ": bad line number");
      }
      c.peeked.emplace(n, raw.substr(tab + 1));
    }
    const size_t n = c.peeked->first;
    if (n < line_no) {
      c.peeked.reset();
      continue;
    }
    c.last_line_no = line_no;
    if (n > line_no) return std::nullopt;
    std::string found = std::move(c.peeked->second);
    c.peeked.reset();
    return found;
  }
}

TranslationBatch FileBackend::TranslateBatch(std::span<const std::string> lines,
                                             const Direction& direction,
                                             std::span<const size_t> line_nos) {
  if (line_nos.size() != lines.size()) {
    throw InvariantError("file backend needs one line number per line");
  }
  Cursor& c = direction.kind == DirectionKind::kSourceToTarget ? src2tgt_ : tgt2src_;
  if (c.path.empty()) {
    throw InputError("file backend has no table for direction " + direction.Label());
  }
  TranslationBatch out;
  out.reserve(lines.size());
  for (size_t k = 0; k < lines.size(); ++k) {
    out.push_back(Lookup(c, line_nos[k]));
  }
  return out;
}

// --- HttpBackend --------------------------------------------------------------------

HttpBackend::HttpBackend(HttpOptions options) : options_(std::move(options)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(options_.url, m, kUrl)) {
    throw InputError("bad MT endpoint URL: " + options_.url);
  }
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
  if (!options_.token_env.empty()) {
    if (const char* tok = std::getenv(options_.token_env.c_str())) token_ = tok;
  }
}

std::vector<std::string> HttpBackend::PostWithRetry(
    std::span<const std::string> lines, const std::string& direction) const {
  nlohmann::json body = {{"direction", direction},
                         {"lines", std::vector<std::string>(lines.begin(), lines.end())}};
  const std::string payload = body.dump();

  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration<double>(options_.timeout_seconds);
  client.set_connection_timeout(
      std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!token_.empty() && !options_.auth_header.empty()) {
    const std::string value =
        options_.auth_header == "Authorization" ? "Bearer " + token_ : token_;
    headers.emplace(options_.auth_header, value);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(
          options_.backoff_seconds * static_cast<double>(1 << (attempt - 1))));
    }
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("MT endpoint returned HTTP " + std::to_string(res->status));
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
      auto out = reply.at("lines").get<std::vector<std::string>>();
      if (out.size() != lines.size()) {
        throw BackendError("MT endpoint returned " + std::to_string(out.size()) +
                           " lines for a batch of " + std::to_string(lines.size()));
      }
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("malformed MT endpoint reply: ") + e.what());
    }
  }
  throw BackendError("MT endpoint failed after " +
                     std::to_string(options_.retries + 1) + " attempts: " + last_error);
}

TranslationBatch HttpBackend::TranslateBatch(std::span<const std::string> lines,
                                             const Direction& direction,
                                             std::span<const size_t> /*line_nos*/) {
  const std::string label = direction.Label();
  std::vector<std::span<const std::string>> batches;
  for (size_t pos = 0; pos < lines.size(); pos += options_.batch_size) {
    batches.push_back(lines.subspan(pos, std::min(options_.batch_size, lines.size() - pos)));
  }
  TranslationBatch out;
  out.reserve(lines.size());
  for (size_t wave = 0; wave < batches.size(); wave += options_.max_in_flight) {
    const size_t end = std::min(batches.size(), wave + options_.max_in_flight);
    std::vector<std::future<std::vector<std::string>>> inflight;
    for (size_t b = wave; b < end; ++b) {
      inflight.push_back(std::async(std::launch::async, [this, &batches, b, &label] {
        return PostWithRetry(batches[b], label);
      }));
    }
    // Collect every future before rethrowing so no worker outlives `lines`.
    std::exception_ptr failure;
    for (auto& f : inflight) {
      try {
        for (auto& l : f.get()) out.emplace_back(std::move(l));
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return out;
}

std::unique_ptr<TranslationBackend> MakeBackend(const BackendSpec& spec) {
  switch (spec.kind) {
    case BackendSpec::Kind::kMock:
      return std::make_unique<MockBackend>(spec.mock);
    case BackendSpec::Kind::kFile:
      return std::make_unique<FileBackend>(spec.src2tgt_path, spec.tgt2src_path);
    case BackendSpec::Kind::kHttp:
      return std::make_unique<HttpBackend>(spec.http);
  }
  throw InputError("unknown backend kind");
}

// --- CheckpointedTranslator -----------------------------------------------------------

CheckpointedTranslator::CheckpointedTranslator(TranslationBackend& backend,
                                               Direction direction,
                                               std::string checkpoint_path,
                                               size_t flush_every)
    : backend_(backend),
      direction_(std::move(direction)),
      path_(std::move(checkpoint_path)),
      flush_every_(std::max<size_t>(1, flush_every)) {
  namespace fs = std::filesystem;
  if (fs::exists(path_)) {
    previous_path_ = path_ + ".resume";
    fs::rename(path_, previous_path_);
    previous_.open(previous_path_);
  }
  out_.open(path_, std::ios::trunc);
  if (!out_) throw InputError("cannot write checkpoint " + path_);
}

CheckpointedTranslator::~CheckpointedTranslator() {
  out_.flush();
  previous_.close();
  if (!previous_path_.empty()) {
    std::error_code ec;
    std::filesystem::remove(previous_path_, ec);
  }
}

bool CheckpointedTranslator::ReadSaved() {
  if (saved_) return true;
  if (!previous_.is_open()) return false;
  std::string raw;
  // A final line without its newline was torn by an interrupted write.
  if (!std::getline(previous_, raw) || previous_.eof()) {
    previous_.close();
    return false;
  }
  const size_t tab = raw.find('\t');
  try {
    const size_t n = std::stoull(raw.substr(0, tab));
    if (tab == std::string::npos) saved_.emplace(n, std::nullopt);
    else saved_.emplace(n, raw.substr(tab + 1));
  } catch (const std::logic_error&) {
    // An unparsable line ends the usable prefix.
    previous_.close();
    return false;
  }
  return true;
}

TranslationBatch CheckpointedTranslator::Translate(std::span<const std::string> lines,
                                                   std::span<const size_t> line_nos) {
  if (line_nos.size() != lines.size()) {
    throw InvariantError("checkpointing needs one line number per line");
  }
  TranslationBatch out(lines.size());
  size_t k = 0;
  // Serve the resumable prefix from the previous checkpoint.
  while (k < lines.size() && ReadSaved()) {
    const size_t line_no = line_nos[k];
    if (saved_->first < line_no) {
      saved_.reset();
      continue;
    }
    if (saved_->first > line_no) break;
    out[k] = std::move(saved_->second);
    saved_.reset();
    ++resumed_;
    ++k;
  }
  if (k < lines.size()) {
    TranslationBatch fresh =
        backend_.TranslateBatch(lines.subspan(k), direction_, line_nos.subspan(k));
    if (fresh.size() != lines.size() - k) {
      throw BackendError("backend returned a batch of the wrong size");
    }
    std::move(fresh.begin(), fresh.end(), out.begin() + k);
  }
  for (size_t i = 0; i < out.size(); ++i) {
    out_ << line_nos[i];
    if (out[i]) out_ << '\t' << *out[i];
    out_ << '\n';
    if (++unflushed_ >= flush_every_) Flush();
  }
  return out;
}

void CheckpointedTranslator::Flush() {
  out_.flush();
  unflushed_ = 0;
}

}  // namespace qeforge
