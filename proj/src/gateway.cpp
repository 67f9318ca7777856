#include "ergkit/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "ergkit/error.hpp"
#include "ergkit/scoring.hpp"

namespace ergkit {

using json = nlohmann::json;

namespace {

std::atomic<std::uint64_t> g_connections{0};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string normalize_text(std::string_view text) {
  std::string unix;
  unix.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      unix.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      unix.push_back(text[i]);
    }
  }
  std::string out;
  out.reserve(unix.size());
  std::size_t start = 0;
  while (start <= unix.size()) {
    auto nl = unix.find('\n', start);
    auto line = std::string_view(unix).substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    out += line;
    if (nl == std::string::npos) break;
    out.push_back('\n');
    start = nl + 1;
  }
  return out;
}

std::string hex_sha256(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string last_user_message(const ChatRequest& r) {
  for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return r.messages.empty() ? std::string() : r.messages.back().content;
}

// Templates put the input block before the output example, so the mock reads
// the first fenced block that parses.
json fenced_payload(const std::string& text) {
  static constexpr std::string_view open = "```json";
  for (auto at = text.find(open); at != std::string::npos; at = text.find(open, at + 1)) {
    const auto start = at + open.size();
    const auto close = text.find("```", start);
    if (close == std::string::npos) break;
    json doc = json::parse(text.begin() + static_cast<std::ptrdiff_t>(start),
                           text.begin() + static_cast<std::ptrdiff_t>(close), nullptr, false);
    if (!doc.is_discarded()) return doc;
    at = close;
  }
  auto body = fenced_json(text);
  json doc = json::parse(body.begin(), body.end(), nullptr, false);
  return doc.is_discarded() ? json::object() : doc;
}

std::string payload_string(const json& doc, const char* key) {
  if (doc.is_object() && doc.contains(key) && doc[key].is_string()) return doc[key].get<std::string>();
  return {};
}

// Small deterministic vocabulary for simulated turns.
constexpr std::string_view kTopics[] = {
    "planning a weekend hiking trip",  "choosing a first programming language", "keeping houseplants alive",
    "learning to cook rice properly",  "writing a polite complaint letter",     "preparing for a job interview",
    "organizing a small book club",    "saving money on groceries",             "training for a five kilometre run",
    "explaining tides to a child",
};

std::uint64_t digest_bits(const ChatRequest& r) {
  auto d = request_digest(r);
  return std::stoull(d.substr(0, 12), nullptr, 16);
}

bool contains_any(std::string_view text, std::initializer_list<std::string_view> needles) {
  const auto low = ascii_lower(text);
  for (auto n : needles) {
    if (low.find(n) != std::string::npos) return true;
  }
  return false;
}

std::string mock_judge_thinking(const ChatRequest& r) {
  const auto text = last_user_message(r);
  const auto doc = fenced_payload(text);
  const std::string thinking = payload_string(doc, "thinking").empty() ? text : payload_string(doc, "thinking");
  const std::size_t steps = static_cast<std::size_t>(std::count(thinking.begin(), thinking.end(), '\n'));
  int logic = 1;
  if (steps >= 2) logic += 1;
  if (contains_any(thinking, {"step", "first", "then"})) logic += 1;
  if (contains_any(thinking, {"therefore", "so ", "hence"})) logic += 1;
  if (steps >= 6) logic += 1;
  int corr = 0;
  if (contains_any(thinking, {"wait", "instead", "revisit"})) corr += 1;
  if (contains_any(thinking, {"check", "verify", "confirm"})) corr += 1;
  if (!contains_any(thinking, {"error", "mistake"})) corr += 1;
  if (steps >= 8) corr += 2;
  json reply = {
      {std::string(kLogicalityKey), {{"reason", "heuristic structure count"}, {"score", logic / 5.0}}},
      {std::string(kCorrectnessKey), {{"reason", "heuristic marker count"}, {"score", corr / 5.0}}},
  };
  return "```json\n" + reply.dump(2) + "\n```";
}

std::string mock_judge_rubric(const ChatRequest& r) {
  const auto doc = fenced_payload(last_user_message(r));
  json out = json::array();
  const auto response = ascii_lower(payload_string(doc, "response"));
  if (doc.is_object() && doc.contains("rubrics") && doc["rubrics"].is_array()) {
    std::size_t i = 1;
    for (const auto& rubric : doc["rubrics"]) {
      // A rubric holds when at least a third of its longer words show up.
      const auto words = split_words(ascii_lower(rubric.is_string() ? rubric.get<std::string>() : ""));
      std::size_t long_words = 0, hits = 0;
      for (const auto& w : words) {
        if (w.size() < 5) continue;
        ++long_words;
        if (response.find(w) != std::string::npos) ++hits;
      }
      const int score = long_words > 0 && hits * 3 >= long_words ? 1 : 0;
      out.push_back({{std::to_string(i) + "-reason", "word overlap " + std::to_string(hits) + "/" +
                                                         std::to_string(long_words)},
                     {"score", score}});
      ++i;
    }
  }
  return out.dump();
}

std::string mock_select(const ChatRequest& r) {
  const auto text = last_user_message(r);
  std::smatch m;
  std::size_t k = 1;
  static const std::regex at_most(R"(at most (\d+))");
  if (std::regex_search(text, m, at_most)) k = std::stoul(m[1]);
  std::size_t n = 0;
  static const std::regex item(R"((^|\n)\[(\d+)\])");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), item); it != std::sregex_iterator(); ++it) ++n;
  json idx = json::array();
  for (std::size_t i = 0; i < std::min(k, n); ++i) idx.push_back(i);
  return json{{"reason", "taking the first candidates in order"}, {"selected_idx", idx}}.dump();
}

}  // namespace

std::string_view fenced_json(std::string_view text) {
  auto fence = text.rfind("```json");
  if (fence != std::string_view::npos) {
    auto start = fence + 7;
    auto end = text.find("```", start);
    return text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
  }
  auto open = text.find_first_of("{[");
  auto close = text.find_last_of("}]");
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return {};
  return text.substr(open, close - open + 1);
}

std::string canonical_request(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"content", normalize_text(m.content)}, {"role", m.role}});
  }
  json doc = {
      {"messages", messages},
      {"model", request.model},
      {"purpose", request.purpose},
      {"sampling",
       {{"max_tokens", request.sampling.max_tokens},
        {"temperature", request.sampling.temperature},
        {"top_p", request.sampling.top_p}}},
  };
  return doc.dump();
}

std::string request_digest(const ChatRequest& request) { return hex_sha256(canonical_request(request)); }

std::uint64_t network_connection_count() noexcept { return g_connections.load(); }
void note_network_connection() noexcept { g_connections.fetch_add(1); }

ChatResponse MockGateway::chat(const ChatRequest& r) {
  const auto text = last_user_message(r);
  const auto payload = fenced_payload(text);
  if (r.purpose == "render_constraint") {
    json reply = {
        {"gen_reason", "restating each node without its answer"},
        {"graph_mermaid", payload_string(payload, "graph_mermaid")},
        {"nodes_descript", payload.is_object() && payload.contains("nodes_descript") ? payload["nodes_descript"]
                                                                                      : json::object()},
        {"gen_constraint", payload_string(payload, "draft")},
        {"rubrics", json::array()},
    };
    return {"```json\n" + reply.dump(2) + "\n```"};
  }
  if (r.purpose == "verify_constraint") return {"Yes"};
  if (r.purpose == "select_constraints") return {mock_select(r)};
  if (r.purpose == "adversarial") return {payload_string(payload, "draft")};
  if (r.purpose == "judge_thinking") return {mock_judge_thinking(r)};
  if (r.purpose == "judge_rubric") return {mock_judge_rubric(r)};
  const auto bits = digest_bits(r);
  const auto topic = kTopics[bits % std::size(kTopics)];
  if (r.purpose == "simulate_user") {
    return {"I could use some help with " + std::string(topic) + ". Where should I start?"};
  }
  if (r.purpose == "simulate_assistant") {
    return {"A good first step for " + std::string(topic) +
            " is to write down what you already know. After that, pick one small goal and review it tomorrow."};
  }
  return {"OK"};
}

ScriptedGateway::ScriptedGateway(std::vector<std::string> replies) : replies_(replies.begin(), replies.end()) {}

ChatResponse ScriptedGateway::chat(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  seen_.push_back(request);
  if (replies_.empty()) throw TransportError("scripted gateway ran out of replies");
  auto text = std::move(replies_.front());
  replies_.pop_front();
  return {text};
}

std::vector<ChatRequest> ScriptedGateway::requests() const {
  std::lock_guard lock(mutex_);
  return seen_;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::string_view kCassetteFormat = "ergkit-cassette";
}

std::shared_ptr<Cassette> Cassette::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open cassette " + path.string());
  auto c = std::make_shared<Cassette>();
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw ParseError("malformed cassette line", n);
    if (!header) {
      if (doc.value("format", "") != kCassetteFormat || doc.value("version", 0) != 1) {
        throw ParseError("expected an ergkit-cassette version 1 header", n);
      }
      header = true;
      continue;
    }
    try {
      CassetteEntry e{doc.at("digest").get<std::string>(), doc.at("request").get<std::string>(),
                      {doc.at("response").at("text").get<std::string>(),
                       doc.at("response").at("finish").get<std::string>()}};
      c->entries_[e.digest] = std::move(e);
    } catch (const json::exception& ex) {
      throw ParseError(std::string("cassette entry: ") + ex.what(), n);
    }
  }
  return c;
}

void Cassette::save(const std::filesystem::path& path) const {
  std::lock_guard lock(mutex_);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write cassette " + path.string());
  out << json{{"format", kCassetteFormat}, {"version", 1}}.dump() << '\n';
  for (const auto& [digest, e] : entries_) {
    out << json{{"digest", e.digest},
                {"request", e.request},
                {"response", {{"text", e.response.text}, {"finish", e.response.finish}}}}
               .dump()
        << '\n';
  }
}

std::optional<ChatResponse> Cassette::find(const std::string& digest) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second.response;
}

void Cassette::insert(CassetteEntry entry) {
  std::lock_guard lock(mutex_);
  auto key = entry.digest;
  entries_[key] = std::move(entry);
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::vector<CassetteEntry> Cassette::entries() const {
  std::lock_guard lock(mutex_);
  std::vector<CassetteEntry> out;
  for (const auto& [_, e] : entries_) out.push_back(e);
  return out;
}

ReplayGateway::ReplayGateway(std::shared_ptr<const Cassette> cassette, std::string model)
    : cassette_(std::move(cassette)), model_(std::move(model)) {
  if (!cassette_) throw ArgumentError("replay needs a cassette");
}

ChatResponse ReplayGateway::chat(const ChatRequest& request) {
  const auto digest = request_digest(request);
  if (auto hit = cassette_->find(digest)) return *hit;
  throw ReplayMissError("no recorded response for " + request.purpose + " request " + digest.substr(0, 16));
}

RecordingGateway::RecordingGateway(std::shared_ptr<Gateway> inner, std::shared_ptr<Cassette> cassette)
    : inner_(std::move(inner)), cassette_(std::move(cassette)) {
  if (!inner_ || !cassette_) throw ArgumentError("recording needs an inner gateway and a cassette");
}

ChatResponse RecordingGateway::chat(const ChatRequest& request) {
  const auto digest = request_digest(request);
  if (auto hit = cassette_->find(digest)) return *hit;
  auto response = inner_->chat(request);
  cassette_->insert({digest, canonical_request(request), response});
  return response;
}

// ---------------------------------------------------------------------------

std::string api_key_from_environment() {
  const char* value = std::getenv(std::string(kApiKeyVariable).c_str());
  if (!value || !*value) throw CredentialError(std::string(kApiKeyVariable) + " is not set");
  return value;
}

HttpTransport default_http_transport(std::chrono::seconds timeout) {
  return [timeout](const HttpRequest& req) -> HttpResult {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(req.url, m, url_re)) return {0, {}, "unsupported URL"};
    note_network_connection();
    httplib::Client client(m[1].str());
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    httplib::Headers headers;
    for (const auto& [k, v] : req.headers) headers.emplace(k, v);
    auto res = client.Post(m[2].str(), headers, req.body, "application/json");
    if (!res) return {0, {}, httplib::to_string(res.error())};
    return {res->status, res->body, {}};
  };
}

LiveGateway::LiveGateway(LiveOptions options, HttpTransport transport, Sleeper sleeper)
    : options_(std::move(options)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
  if (options_.api_key.empty()) options_.api_key = api_key_from_environment();
  if (!transport_) transport_ = default_http_transport(options_.timeout);
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (options_.max_retries < 0) throw ConfigError("max_retries must be non-negative");
}

void LiveGateway::pace() {
  if (options_.requests_per_second <= 0) return;
  const auto spacing = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / options_.requests_per_second));
  std::chrono::steady_clock::duration wait{};
  {
    std::lock_guard lock(pace_mutex_);
    const auto now = std::chrono::steady_clock::now();
    if (next_slot_ > now) wait = next_slot_ - now;
    next_slot_ = std::max(now, next_slot_) + spacing;
  }
  if (wait.count() > 0) sleeper_(std::chrono::duration_cast<std::chrono::milliseconds>(wait));
}

ChatResponse LiveGateway::chat(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  json body = {{"model", request.model.empty() ? options_.model : request.model},
               {"messages", messages},
               {"temperature", request.sampling.temperature},
               {"top_p", request.sampling.top_p},
               {"max_tokens", request.sampling.max_tokens}};
  HttpRequest http{options_.base_url + "/chat/completions",
                   {{"Authorization", "Bearer " + options_.api_key}},
                   body.dump()};
  auto backoff = options_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleeper_(backoff);
      backoff *= 2;
    }
    pace();
    const auto res = transport_(http);
    if (res.status == 401 || res.status == 403) {
      throw CredentialError("endpoint rejected the credentials (HTTP " + std::to_string(res.status) + ")");
    }
    const bool transient = res.status == 0 || res.status == 408 || res.status == 429 || res.status >= 500;
    if (transient) {
      last_error = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status < 200 || res.status >= 300) {
      throw TransportError("HTTP " + std::to_string(res.status) + " from chat endpoint");
    }
    json doc = json::parse(res.body, nullptr, false);
    try {
      const auto& choice = doc.at("choices").at(0);
      ChatResponse out;
      out.text = choice.at("message").at("content").get<std::string>();
      if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
        out.finish = choice["finish_reason"].get<std::string>();
      }
      return out;
    } catch (const json::exception&) {
      throw ProtocolError("chat endpoint returned an unexpected body");
    }
  }
  throw TransportError("chat request failed after " + std::to_string(options_.max_retries) +
                       " retries: " + last_error);
}

}  // namespace ergkit
