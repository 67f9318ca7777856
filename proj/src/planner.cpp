#include "ergkit/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "ergkit/random.hpp"
#include "ergkit/utf8.hpp"

namespace ergkit {
namespace {

// Filler vocabularies. None of these words is a keyword candidate or a bank
// answer, so inserted tokens are the only source of keyword hits.
const std::vector<std::string_view> kLatin = {
    "a",       "an",      "it",      "so",      "we",      "of",      "to",      "in",      "on",      "at",
    "time",    "people",  "way",     "water",   "light",   "small",   "clear",   "plan",    "path",    "stone",
    "river",   "garden",  "simple",  "method",  "careful", "notice",  "pattern", "balance", "window",  "steady",
    "morning", "weather", "journey", "quiet",   "bright",  "number",  "letter",  "reason",  "detail",  "example",
    "useful",  "honest",  "gentle",  "wooden",  "silver",  "market",  "season",  "harbor",  "meadow",  "lantern",
    "compass", "library", "picture", "village", "machine", "station", "kitchen", "evening", "shadow",  "thought",
    "feature", "project", "measure", "courage", "harvest", "orchard", "blanket", "whisper", "thunder", "cabinet",
    "pencil",  "marble",  "canvas",  "ribbon",  "ladder",  "signal",  "basket",  "mirror",  "anchor",  "button",
    "candle",  "yard",    "bridge",  "cloud",   "field",   "rope",    "shelf",   "table",   "wall",    "door",
};

const std::vector<std::string_view> kCyrillic = {
    "и",       "в",       "на",      "с",        "о",       "время",   "люди",    "путь",    "вода",   "свет",
    "малый",   "ясный",   "план",    "камень",   "река",    "сад",     "метод",   "узор",    "окно",   "утро",
    "погода",  "тихий",   "яркий",   "число",    "буква",   "вопрос",  "ответ",   "причина", "пример", "полезный",
    "честный", "рынок",   "сезон",   "гавань",   "луг",     "фонарь",  "компас",  "книга",   "картина", "история",
    "деревня", "машина",  "станция", "кухня",    "вечер",   "тень",    "мысль",   "проект",  "мера",   "дух",
    "урожай",  "одеяло",  "шёпот",   "гром",     "карандаш", "мрамор", "лента",   "лестница", "сигнал", "корзина",
    "зеркало", "якорь",   "кнопка",  "свеча",    "мост",    "поле",    "дверь",   "стол",    "стена",  "облако",
};

const std::vector<std::string_view> kCjk = {
    "时间", "人们", "道路", "水",   "光",     "小",   "清楚",   "计划", "石头", "河流", "花园", "简单",
    "方法", "仔细", "注意", "模式", "平衡",   "窗户", "早晨",   "天气", "旅程", "安静", "明亮", "数字",
    "问题", "答案", "原因", "细节", "例子",   "有用", "诚实",   "市场", "季节", "港口", "草地", "灯笼",
    "指南针", "图书馆", "图片", "历史", "村庄", "机器", "车站", "厨房", "晚上", "影子", "想法", "项目",
};

const std::vector<std::string_view>& vocabulary(int lang) {
  switch (lang) {
    case 1:
      return kCyrillic;
    case 2:
      return kCjk;
    default:
      return kLatin;
  }
}

std::string_view terminal(int lang, int type) {
  static constexpr std::array<std::string_view, 3> ascii = {".", "?", "!"};
  static constexpr std::array<std::string_view, 3> wide = {"。", "？", "！"};
  return lang == 2 ? wide[type] : ascii[type];
}

std::string capitalize(std::string_view w) {
  std::string out(w);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  if (out.size() >= 2 && static_cast<unsigned char>(out[0]) == 0xD0) {
    // Cyrillic lowercase а..п (D0 B0..BF) and р..я (D1 80..8F).
    const auto b = static_cast<unsigned char>(out[1]);
    if (b >= 0xB0 && b <= 0xBF) out[1] = static_cast<char>(b - 0x20);
  } else if (out.size() >= 2 && static_cast<unsigned char>(out[0]) == 0xD1) {
    const auto b = static_cast<unsigned char>(out[1]);
    if (b >= 0x80 && b <= 0x8F) {
      out[0] = static_cast<char>(0xD0);
      out[1] = static_cast<char>(b + 0x20);
    }
  }
  return out;
}

struct Token {
  std::string fixed;
  std::uint64_t seed = 0;
  int words = 1;
  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  int words = 8;
  int type = 0;  // 0 declarative, 1 interrogative, 2 exclamatory
  int commas = 0;
  std::uint64_t seed = 0;
};

struct Paragraph {
  std::vector<Sentence> sentences;
  bool broken = false;  // one sentence per line
};

struct Plan {
  int lang = 0;
  std::vector<Paragraph> prose;
  std::vector<Token> bold;
  std::vector<Token> items;
  bool item_stop = true;
  int list_after = 0;
  int numbered = 0;
  int numbered_after = 0;
  int quotes = 0;
  int brackets = 0;
  int symbols = 0;
  std::vector<int> keywords;  // parallel to Context::terms
  std::string prefix;
  std::string suffix;
  int pad = 0;
  bool fragment = false;
};

// What the predicates ask for, gathered once.
struct Context {
  std::vector<Predicate> predicates;
  std::vector<std::string> terms;
  std::vector<std::string> bold_texts;
  std::vector<std::string> item_texts;
  std::vector<std::string> openings;
  std::vector<std::string> endings;
  std::vector<int> languages;
  std::set<Dimension> dims;
};

std::string filler(int lang, std::uint64_t seed, int words) {
  const auto& vocab = vocabulary(lang);
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += vocab[mix_seed(seed, static_cast<std::uint64_t>(i)) % vocab.size()];
  }
  return out;
}

std::string token_text(int lang, const Token& t) { return t.fixed.empty() ? filler(lang, t.seed, t.words) : t.fixed; }

std::string render(const Plan& plan, const Context& ctx) {
  // Tokens spread round-robin over prose sentences.
  std::vector<std::string> inserts;
  for (const auto& b : plan.bold) inserts.push_back("**" + token_text(plan.lang, b) + "**");
  for (int i = 0; i < plan.quotes; ++i) inserts.push_back("\"" + filler(plan.lang, 7000 + i, 1) + "\"");
  for (int i = 0; i < plan.brackets; ++i) inserts.push_back("[" + filler(plan.lang, 9000 + i, 1) + "]");
  for (int i = 0; i < plan.symbols; ++i) inserts.push_back("&");
  for (std::size_t k = 0; k < plan.keywords.size(); ++k) {
    for (int i = 0; i < plan.keywords[k]; ++i) inserts.push_back(ctx.terms[k]);
  }
  if (plan.pad > 0) {
    std::string pad;
    for (int i = 0; i < plan.pad; ++i) pad += plan.lang == 0 ? "o" : plan.lang == 1 ? "о" : "口";
    inserts.push_back(pad);
  }

  std::size_t total_sentences = 0;
  for (const auto& p : plan.prose) total_sentences += p.sentences.size();
  std::vector<std::vector<std::string>> per_sentence(std::max<std::size_t>(total_sentences, 1));
  for (std::size_t i = 0; i < inserts.size(); ++i) per_sentence[i % per_sentence.size()].push_back(inserts[i]);

  std::vector<std::string> blocks;
  std::size_t sidx = 0;
  const std::string_view space = " ";
  for (std::size_t pi = 0; pi < plan.prose.size(); ++pi) {
    const auto& para = plan.prose[pi];
    std::string block;
    for (std::size_t si = 0; si < para.sentences.size(); ++si, ++sidx) {
      const auto& s = para.sentences[si];
      std::vector<std::string> words;
      const auto& vocab = vocabulary(plan.lang);
      for (int w = 0; w < s.words; ++w) {
        words.emplace_back(vocab[mix_seed(s.seed, static_cast<std::uint64_t>(w)) % vocab.size()]);
      }
      for (int c = 0; c < std::min(s.commas, s.words - 1); ++c) words[static_cast<std::size_t>(c)] += ",";
      auto& extra = per_sentence[sidx];
      words.insert(words.begin() + std::min<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(words.size())),
                   extra.begin(), extra.end());
      if (pi == 0 && si == 0 && !plan.prefix.empty()) words.insert(words.begin(), plan.prefix);
      const bool last = pi + 1 == plan.prose.size() && si + 1 == para.sentences.size();
      if (last && !plan.suffix.empty()) words.push_back(plan.suffix);
      if (!words.empty()) words[0] = capitalize(words[0]);
      std::string sentence;
      for (std::size_t w = 0; w < words.size(); ++w) {
        if (w) sentence += space;
        sentence += words[w];
      }
      sentence += terminal(plan.lang, s.type);
      if (!block.empty()) block += para.broken ? "\n" : " ";
      block += sentence;
    }
    if (plan.fragment && pi + 1 == plan.prose.size()) block += " " + filler(plan.lang, 4242, 3);
    blocks.push_back(std::move(block));

    if (!plan.items.empty() && plan.list_after == static_cast<int>(pi)) {
      std::string list;
      for (const auto& it : plan.items) {
        if (!list.empty()) list += '\n';
        list += "- " + token_text(plan.lang, it) + (plan.item_stop ? std::string(terminal(plan.lang, 0)) : "");
      }
      blocks.push_back(std::move(list));
    }
    if (plan.numbered > 0 && plan.numbered_after == static_cast<int>(pi)) {
      std::string list;
      for (int i = 0; i < plan.numbered; ++i) {
        if (!list.empty()) list += '\n';
        list += std::to_string(i + 1) + ". " + capitalize(filler(plan.lang, 5000 + i, 3)) +
                std::string(terminal(plan.lang, 0));
      }
      blocks.push_back(std::move(list));
    }
  }
  std::string out;
  for (const auto& b : blocks) {
    if (!out.empty()) out += "\n\n";
    out += b;
  }
  return out;
}

void clamp_plan(Plan& plan) {
  const int p = static_cast<int>(plan.prose.size());
  plan.list_after = std::clamp(plan.list_after, 0, p - 1);
  plan.numbered_after = std::clamp(plan.numbered_after, 0, p - 1);
}

// ---------------------------------------------------------------------------
// Hints: a starting point read off the predicates.

std::int64_t pick_count(const Predicate& p, std::int64_t fallback) {
  auto num = [&](std::size_t i) -> std::optional<Rational> {
    if (i < p.parameters.size()) {
      if (const auto* r = std::get_if<Rational>(&p.parameters[i])) return *r;
    }
    return std::nullopt;
  };
  switch (p.condition) {
    case Condition::no_more_than:
    case Condition::maximum_value:
      if (auto v = num(0)) return std::min<std::int64_t>(fallback, v->floor());
      break;
    case Condition::no_less_than:
    case Condition::minimum_value:
      if (auto v = num(0)) return std::max<std::int64_t>(fallback, -(-*v).floor());
      break;
    case Condition::interval:
      if (auto lo = num(0), hi = num(1); lo && hi) {
        return (-(-*lo).floor() + hi->floor()) / 2;
      }
      break;
    case Condition::equal_to:
      if (auto v = num(0)) return v->floor();
      break;
    case Condition::not_equal_to:
      if (auto v = num(0); v && *v == Rational(fallback)) return fallback + 1;
      break;
    case Condition::positive_integer_multiple_of:
      if (auto v = num(0)) return std::max<std::int64_t>(1, v->floor()) * std::max<std::int64_t>(1, fallback / std::max<std::int64_t>(1, v->floor()));
      break;
    case Condition::required:
    case Condition::forbidden:
      if (const auto* props = std::get_if<PropertyList>(&p.parameters[0])) {
        for (std::int64_t n = std::max<std::int64_t>(1, fallback); n < fallback + 60; ++n) {
          bool ok = true;
          for (auto prop : props->items) {
            if (prop == Property::distinct) continue;
            const bool has = has_property(Rational(n), prop);
            if (has != (p.condition == Condition::required)) ok = false;
          }
          if (ok) return n;
        }
      }
      break;
    default:
      break;
  }
  return fallback;
}

void collect(const Predicate& p, Context& ctx) {
  if (p.combinator()) {
    for (const auto& c : p.children) collect(c, ctx);
    return;
  }
  const Dimension d = *p.dimension;
  ctx.dims.insert(d);
  for (const auto& t : p.terms) {
    if (std::find(ctx.terms.begin(), ctx.terms.end(), t) == ctx.terms.end()) ctx.terms.push_back(t);
  }
  auto texts = [&]() -> std::vector<std::string> {
    if (p.parameters.empty()) return {};
    if (const auto* s = std::get_if<std::string>(&p.parameters[0])) return {*s};
    if (const auto* l = std::get_if<TextList>(&p.parameters[0])) return l->items;
    return {};
  };
  auto add_all = [](std::vector<std::string>& into, const std::vector<std::string>& from) {
    for (const auto& s : from) {
      if (std::find(into.begin(), into.end(), s) == into.end()) into.push_back(s);
    }
  };
  const bool wants = p.condition == Condition::required || p.condition == Condition::equal_to;
  switch (d) {
    case Dimension::keyword_set:
      for (const auto& t : texts()) {
        if (std::find(ctx.terms.begin(), ctx.terms.end(), t) == ctx.terms.end()) ctx.terms.push_back(t);
      }
      break;
    case Dimension::bold_word_set:
      if (wants) add_all(ctx.bold_texts, texts());
      break;
    case Dimension::unordered_list_items:
      if (wants) add_all(ctx.item_texts, texts());
      break;
    case Dimension::beginning_of_reply:
      if (wants) add_all(ctx.openings, texts());
      break;
    case Dimension::ending_of_reply:
      if (wants) add_all(ctx.endings, texts());
      break;
    case Dimension::language:
      for (const auto& t : texts()) {
        if (t == "cyrillic") ctx.languages.push_back(1);
        if (t == "cjk") ctx.languages.push_back(2);
        if (t == "latin") ctx.languages.push_back(0);
      }
      break;
    default:
      break;
  }
}

void apply_hint(const Predicate& p, const Context& ctx, Plan& plan, Rng& rng) {
  if (p.combinator()) {
    if (p.condition == Condition::logical_or) {
      if (!p.children.empty()) apply_hint(p.children[rng.index(p.children.size())], ctx, plan, rng);
      return;
    }
    for (const auto& c : p.children) apply_hint(c, ctx, plan, rng);
    return;
  }
  const Dimension d = *p.dimension;
  auto resize_tokens = [&](std::vector<Token>& tokens, std::int64_t n) {
    n = std::clamp<std::int64_t>(n, 0, 60);
    while (static_cast<std::int64_t>(tokens.size()) < n) tokens.push_back({{}, rng.next(), 1});
    tokens.resize(static_cast<std::size_t>(n));
  };
  std::size_t sentences = 0;
  for (const auto& para : plan.prose) sentences += para.sentences.size();
  switch (d) {
    case Dimension::paragraph_count: {
      const auto extra = (plan.items.empty() ? 0 : 1) + (plan.numbered > 0 ? 1 : 0);
      auto n = std::clamp<std::int64_t>(pick_count(p, static_cast<std::int64_t>(plan.prose.size()) + extra) - extra, 1, 30);
      while (static_cast<std::int64_t>(plan.prose.size()) < n) plan.prose.push_back({{{6, 0, 0, rng.next()}}, false});
      plan.prose.resize(static_cast<std::size_t>(n));
      break;
    }
    case Dimension::sentence_count: {
      auto n = std::clamp<std::int64_t>(pick_count(p, static_cast<std::int64_t>(sentences)), 1, 80);
      for (std::size_t i = 0; static_cast<std::int64_t>(sentences) < n; ++i, ++sentences) {
        plan.prose[i % plan.prose.size()].sentences.push_back({6, 0, 0, rng.next()});
      }
      break;
    }
    case Dimension::word_count:
    case Dimension::character_count: {
      const std::int64_t per_word = d == Dimension::word_count ? 1 : 6;
      auto target = pick_count(p, static_cast<std::int64_t>(sentences) * 6 * per_word);
      const int words = static_cast<int>(std::clamp<std::int64_t>(
          target / per_word / std::max<std::int64_t>(1, static_cast<std::int64_t>(sentences)), 2, 40));
      for (auto& para : plan.prose) {
        for (auto& s : para.sentences) s.words = words;
      }
      break;
    }
    case Dimension::punctuation_count: {
      auto target = pick_count(p, static_cast<std::int64_t>(sentences));
      std::int64_t extra = std::max<std::int64_t>(0, target - static_cast<std::int64_t>(sentences));
      for (auto& para : plan.prose) {
        for (auto& s : para.sentences) {
          const int c = static_cast<int>(std::min<std::int64_t>(extra, s.words - 1));
          s.commas = c;
          extra -= c;
        }
      }
      break;
    }
    case Dimension::bold_word_count:
      resize_tokens(plan.bold, pick_count(p, static_cast<std::int64_t>(plan.bold.size())));
      break;
    case Dimension::unordered_list_item_count:
      resize_tokens(plan.items, pick_count(p, std::max<std::int64_t>(2, static_cast<std::int64_t>(plan.items.size()))));
      break;
    case Dimension::numbered_list_item_count:
      plan.numbered = static_cast<int>(std::clamp<std::int64_t>(pick_count(p, plan.numbered), 0, 40));
      break;
    case Dimension::quotation_count:
      plan.quotes = static_cast<int>(std::clamp<std::int64_t>(pick_count(p, plan.quotes), 0, 40));
      break;
    case Dimension::bracketed_term_count:
      plan.brackets = static_cast<int>(std::clamp<std::int64_t>(pick_count(p, plan.brackets), 0, 40));
      break;
    case Dimension::special_symbol_count:
      plan.symbols = static_cast<int>(std::clamp<std::int64_t>(pick_count(p, plan.symbols), 0, 40));
      break;
    case Dimension::keyword_count:
      if (!p.terms.empty()) {
        auto at = std::find(ctx.terms.begin(), ctx.terms.end(), p.terms[0]) - ctx.terms.begin();
        plan.keywords[static_cast<std::size_t>(at)] =
            static_cast<int>(std::clamp<std::int64_t>(pick_count(p, 1), 0, 40));
      }
      break;
    case Dimension::line_count: {
      auto target = pick_count(p, static_cast<std::int64_t>(plan.prose.size()));
      for (auto& para : plan.prose) para.broken = target > static_cast<std::int64_t>(plan.prose.size());
      break;
    }
    case Dimension::keyword_set:
      if (p.condition == Condition::required) {
        if (const auto* l = std::get_if<TextList>(&p.parameters[0])) {
          for (const auto& t : l->items) {
            auto at = std::find(ctx.terms.begin(), ctx.terms.end(), t) - ctx.terms.begin();
            plan.keywords[static_cast<std::size_t>(at)] = std::max(1, plan.keywords[static_cast<std::size_t>(at)]);
          }
        }
      }
      break;
    case Dimension::bold_word_set:
      for (const auto& t : ctx.bold_texts) plan.bold.push_back({t, 0, 1});
      break;
    case Dimension::unordered_list_items:
      if (plan.items.empty()) resize_tokens(plan.items, 3);
      for (const auto& t : ctx.item_texts) plan.items.push_back({t, 0, 1});
      if (p.condition == Condition::strictly_ascending_by_length) {
        for (std::size_t i = 0; i < plan.items.size(); ++i) {
          if (plan.items[i].fixed.empty()) plan.items[i].words = static_cast<int>(i) + 1;
        }
      }
      break;
    case Dimension::beginning_of_reply:
      if (!ctx.openings.empty()) plan.prefix = ctx.openings.front();
      break;
    case Dimension::ending_of_reply:
      if (!ctx.endings.empty()) plan.suffix = ctx.endings.front();
      break;
    case Dimension::language:
      if (!ctx.languages.empty()) plan.lang = ctx.languages.front();
      break;
    case Dimension::sentence_type_mix:
      if (p.condition == Condition::required) {
        if (const auto* l = std::get_if<TextList>(&p.parameters[0])) {
          std::size_t i = 0;
          for (auto& para : plan.prose) {
            for (auto& s : para.sentences) {
              if (i < l->items.size()) {
                const auto& t = l->items[i++];
                s.type = t == "interrogative" ? 1 : t == "exclamatory" ? 2 : 0;
              }
            }
          }
        }
      }
      break;
    default:
      break;
  }
}

// ---------------------------------------------------------------------------
// Search

int step(Rng& rng, int magnitude) {
  const int m = static_cast<int>(rng.between(1, std::max(1, magnitude)));
  return rng.chance(0.5) ? m : -m;
}

Sentence& random_sentence(Plan& plan, Rng& rng) {
  auto& para = plan.prose[rng.index(plan.prose.size())];
  return para.sentences[rng.index(para.sentences.size())];
}

void mutate(Plan& plan, const Context& ctx, Rng& rng) {
  auto relevant = [&](std::initializer_list<Dimension> ds) {
    for (auto d : ds) {
      if (ctx.dims.count(d)) return true;
    }
    return false;
  };
  for (;;) {
    const int move = static_cast<int>(rng.index(19));
    switch (move) {
      case 0:
        if (plan.prose.size() < 30) {
          Paragraph p;
          const auto& like = plan.prose[rng.index(plan.prose.size())];
          for (const auto& s : like.sentences) p.sentences.push_back({s.words, s.type, 0, rng.next()});
          plan.prose.insert(plan.prose.begin() + static_cast<std::ptrdiff_t>(rng.index(plan.prose.size() + 1)), p);
          return;
        }
        break;
      case 1:
        if (plan.prose.size() > 1) {
          plan.prose.erase(plan.prose.begin() + static_cast<std::ptrdiff_t>(rng.index(plan.prose.size())));
          clamp_plan(plan);
          return;
        }
        break;
      case 2: {
        auto& para = plan.prose[rng.index(plan.prose.size())];
        if (para.sentences.size() < 20) {
          const auto& like = para.sentences[rng.index(para.sentences.size())];
          para.sentences.insert(para.sentences.begin() + static_cast<std::ptrdiff_t>(rng.index(para.sentences.size() + 1)),
                                {like.words, like.type, 0, rng.next()});
          return;
        }
        break;
      }
      case 3: {
        auto& para = plan.prose[rng.index(plan.prose.size())];
        if (para.sentences.size() > 1) {
          para.sentences.erase(para.sentences.begin() + static_cast<std::ptrdiff_t>(rng.index(para.sentences.size())));
          return;
        }
        break;
      }
      case 4: {
        auto& s = random_sentence(plan, rng);
        s.words = std::clamp(s.words + step(rng, std::max(1, s.words / 3)), 2, 40);
        s.commas = std::min(s.commas, s.words - 1);
        return;
      }
      case 5:
        if (relevant({Dimension::sentence_type_mix})) {
          random_sentence(plan, rng).type = static_cast<int>(rng.index(3));
          return;
        }
        break;
      case 6:
        random_sentence(plan, rng).seed = rng.next();
        return;
      case 7: {
        auto& s = random_sentence(plan, rng);
        s.commas = std::clamp(s.commas + step(rng, 2), 0, s.words - 1);
        return;
      }
      case 8: {
        const int op = static_cast<int>(rng.index(6));
        if (op == 0 && plan.bold.size() < 60) {
          plan.bold.insert(plan.bold.begin() + static_cast<std::ptrdiff_t>(rng.index(plan.bold.size() + 1)),
                           {{}, rng.next(), 1});
          return;
        }
        if (op == 1 && !plan.bold.empty()) {
          plan.bold.erase(plan.bold.begin() + static_cast<std::ptrdiff_t>(rng.index(plan.bold.size())));
          return;
        }
        if (op == 2 && !plan.bold.empty()) {
          auto& t = plan.bold[rng.index(plan.bold.size())];
          t.fixed.clear();
          t.seed = rng.next();
          return;
        }
        if (op == 3 && plan.bold.size() > 1) {
          std::stable_sort(plan.bold.begin(), plan.bold.end(), [&](const Token& a, const Token& b) {
            return utf8::length(token_text(plan.lang, a)) < utf8::length(token_text(plan.lang, b));
          });
          return;
        }
        if (op == 4 && !ctx.bold_texts.empty()) {
          plan.bold.insert(plan.bold.begin() + static_cast<std::ptrdiff_t>(rng.index(plan.bold.size() + 1)),
                           {rng.pick(ctx.bold_texts), 0, 1});
          return;
        }
        if (op == 5 && !plan.bold.empty()) {
          auto& t = plan.bold[rng.index(plan.bold.size())];
          if (t.fixed.empty()) t.words = std::clamp(t.words + step(rng, 1), 1, 6);
          return;
        }
        break;
      }
      case 9: {
        const int op = static_cast<int>(rng.index(7));
        if (op == 0 && plan.items.size() < 60) {
          plan.items.insert(plan.items.begin() + static_cast<std::ptrdiff_t>(rng.index(plan.items.size() + 1)),
                            {{}, rng.next(), static_cast<int>(rng.between(1, 4))});
          return;
        }
        if (op == 1 && !plan.items.empty()) {
          plan.items.erase(plan.items.begin() + static_cast<std::ptrdiff_t>(rng.index(plan.items.size())));
          return;
        }
        if (op == 2 && !plan.items.empty()) {
          auto& t = plan.items[rng.index(plan.items.size())];
          t.fixed.clear();
          t.seed = rng.next();
          return;
        }
        if (op == 3 && plan.items.size() > 1) {
          std::stable_sort(plan.items.begin(), plan.items.end(), [&](const Token& a, const Token& b) {
            return utf8::length(token_text(plan.lang, a)) < utf8::length(token_text(plan.lang, b));
          });
          return;
        }
        if (op == 4 && !plan.items.empty()) {
          auto& t = plan.items[rng.index(plan.items.size())];
          if (t.fixed.empty()) t.words = std::clamp(t.words + step(rng, 2), 1, 12);
          return;
        }
        if (op == 5 && !ctx.item_texts.empty()) {
          plan.items.insert(plan.items.begin() + static_cast<std::ptrdiff_t>(rng.index(plan.items.size() + 1)),
                            {rng.pick(ctx.item_texts), 0, 1});
          return;
        }
        if (op == 6) {
          plan.item_stop = !plan.item_stop;
          return;
        }
        break;
      }
      case 10:
        if (!plan.items.empty() || plan.numbered > 0) {
          if (rng.chance(0.5)) {
            plan.list_after = static_cast<int>(rng.index(plan.prose.size()));
          } else {
            plan.numbered_after = static_cast<int>(rng.index(plan.prose.size()));
          }
          return;
        }
        break;
      case 11:
        if (relevant({Dimension::numbered_list_item_count, Dimension::paragraph_count, Dimension::line_count,
                      Dimension::sentence_count})) {
          plan.numbered = std::clamp(plan.numbered + step(rng, 2), 0, 40);
          return;
        }
        break;
      case 12:
        if (relevant({Dimension::quotation_count, Dimension::punctuation_count})) {
          plan.quotes = std::clamp(plan.quotes + step(rng, 2), 0, 40);
          return;
        }
        break;
      case 13:
        if (relevant({Dimension::bracketed_term_count, Dimension::punctuation_count})) {
          plan.brackets = std::clamp(plan.brackets + step(rng, 2), 0, 40);
          return;
        }
        break;
      case 14:
        if (relevant({Dimension::special_symbol_count, Dimension::word_count, Dimension::character_count})) {
          plan.symbols = std::clamp(plan.symbols + step(rng, 2), 0, 40);
          return;
        }
        break;
      case 15:
        if (!plan.keywords.empty()) {
          auto& k = plan.keywords[rng.index(plan.keywords.size())];
          k = std::clamp(k + step(rng, 2), 0, 40);
          return;
        }
        break;
      case 16:
        if (relevant({Dimension::line_count})) {
          auto& para = plan.prose[rng.index(plan.prose.size())];
          para.broken = !para.broken;
          return;
        }
        break;
      case 17: {
        const int op = static_cast<int>(rng.index(3));
        if (op == 0 && relevant({Dimension::language})) {
          plan.lang = static_cast<int>(rng.index(3));
          return;
        }
        if (op == 1 && relevant({Dimension::beginning_of_reply})) {
          plan.prefix = ctx.openings.empty() || rng.chance(0.3) ? std::string() : rng.pick(ctx.openings);
          return;
        }
        if (op == 2 && relevant({Dimension::ending_of_reply})) {
          plan.suffix = ctx.endings.empty() || rng.chance(0.3) ? std::string() : rng.pick(ctx.endings);
          return;
        }
        break;
      }
      case 18: {
        if (relevant({Dimension::character_count, Dimension::sentence_type_mix})) {
          if (rng.chance(0.8) || !relevant({Dimension::sentence_type_mix})) {
            plan.pad = std::clamp(plan.pad + step(rng, 3), 0, 12);
          } else {
            plan.fragment = !plan.fragment;
          }
          return;
        }
        break;
      }
      default:
        break;
    }
  }
}

struct Objective {
  const Context* ctx;
  std::optional<std::size_t> target;
  std::optional<Predicate> negated;

  double operator()(const ResponseMeasurements& m) const {
    double cost = 0;
    for (std::size_t i = 0; i < ctx->predicates.size(); ++i) {
      if (target && *target == i) {
        cost += negated ? violation_distance(*negated, m) : (verify(ctx->predicates[i], m) ? 1.0 : 0.0);
      } else {
        cost += violation_distance(ctx->predicates[i], m);
      }
    }
    return cost;
  }
};

struct SearchResult {
  Plan plan;
  std::string text;
  double cost;
};

SearchResult search(Plan start, const Context& ctx, const Objective& objective, Rng& rng, std::size_t iterations) {
  auto eval = [&](const Plan& plan, std::string& text) {
    text = render(plan, ctx);
    return objective(measure(text, ctx.terms));
  };
  SearchResult best{start, {}, 0};
  best.cost = eval(start, best.text);
  Plan current = start;
  double current_cost = best.cost;
  for (std::size_t it = 0; it < iterations && best.cost > 0; ++it) {
    Plan next = current;
    const int moves = rng.chance(0.25) ? 2 : 1;
    for (int k = 0; k < moves; ++k) mutate(next, ctx, rng);
    clamp_plan(next);
    std::string text;
    const double cost = eval(next, text);
    const double temperature = 1.5 * (1.0 - static_cast<double>(it) / static_cast<double>(iterations)) + 0.05;
    if (cost <= current_cost || rng.unit() < std::exp(-(cost - current_cost) / temperature)) {
      current = std::move(next);
      current_cost = cost;
      if (cost < best.cost) best = {current, std::move(text), cost};
    }
  }
  return best;
}

Context make_context(std::span<const Predicate> predicates) {
  Context ctx;
  ctx.predicates.assign(predicates.begin(), predicates.end());
  for (const auto& p : predicates) collect(p, ctx);
  return ctx;
}

Plan initial_plan(const Context& ctx, Rng& rng) {
  Plan plan;
  plan.keywords.assign(ctx.terms.size(), 0);
  plan.prose.push_back({{{7, 0, 0, rng.next()}, {8, 0, 1, rng.next()}}, false});
  plan.prose.push_back({{{6, 0, 0, rng.next()}, {9, 0, 0, rng.next()}}, false});
  // Structural hints first so that length hints see the final sentence count.
  static constexpr Dimension order[] = {
      Dimension::language,        Dimension::paragraph_count,  Dimension::unordered_list_items,
      Dimension::unordered_list_item_count, Dimension::numbered_list_item_count, Dimension::sentence_count,
      Dimension::sentence_type_mix, Dimension::bold_word_set,  Dimension::bold_word_count,
      Dimension::keyword_count,   Dimension::keyword_set,      Dimension::quotation_count,
      Dimension::bracketed_term_count, Dimension::special_symbol_count, Dimension::beginning_of_reply,
      Dimension::ending_of_reply, Dimension::line_count,       Dimension::word_count,
      Dimension::character_count, Dimension::punctuation_count,
  };
  for (auto d : order) {
    for (const auto& p : ctx.predicates) {
      auto visit = [&](const Predicate& q) {
        if (!q.combinator() && q.dimension == d) apply_hint(q, ctx, plan, rng);
      };
      if (p.combinator() && p.condition == Condition::logical_and) {
        for (const auto& c : p.children) visit(c);
      } else {
        visit(p);
      }
    }
  }
  clamp_plan(plan);
  return plan;
}

bool all_hold(std::span<const Predicate> predicates, const std::string& text, const Context& ctx,
              std::optional<std::size_t> broken) {
  const auto m = measure(text, ctx.terms);
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (verify(predicates[i], m) != (!broken || *broken != i)) return false;
  }
  return true;
}

std::optional<SearchResult> solve(const Context& ctx, std::uint64_t seed, const PlannerOptions& options) {
  const Objective objective{&ctx, std::nullopt, std::nullopt};
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Rng rng(mix_seed(seed, 100 + r));
    auto result = search(initial_plan(ctx, rng), ctx, objective, rng, options.max_iterations);
    if (result.cost == 0 && all_hold(ctx.predicates, result.text, ctx, std::nullopt)) return result;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Predicate> negate(const Predicate& p) {
  if (p.combinator()) {
    Predicate out;
    out.condition = p.condition == Condition::logical_and ? Condition::logical_or : Condition::logical_and;
    for (const auto& c : p.children) {
      auto n = negate(c);
      if (!n) return std::nullopt;
      out.children.push_back(std::move(*n));
    }
    return out;
  }
  if (!p.dimension || measurement_of(*p.dimension) != MeasurementKind::count) return std::nullopt;
  auto num = [&](std::size_t i) { return std::get_if<Rational>(&p.parameters[i]); };
  auto leaf = [&](Condition c, Rational v) {
    Predicate q = p;
    q.condition = c;
    q.parameters = {v};
    return q;
  };
  auto ceil = [](const Rational& r) { return -(-r).floor(); };
  switch (p.condition) {
    case Condition::no_more_than:
    case Condition::maximum_value:
      if (auto* v = num(0)) return leaf(Condition::no_less_than, Rational(v->floor() + 1));
      break;
    case Condition::no_less_than:
    case Condition::minimum_value:
      if (auto* v = num(0)) return leaf(Condition::no_more_than, Rational(ceil(*v) - 1));
      break;
    case Condition::interval:
      if (auto *lo = num(0), *hi = num(1); lo && hi) {
        Predicate out;
        out.condition = Condition::logical_or;
        out.children = {leaf(Condition::no_more_than, Rational(ceil(*lo) - 1)),
                        leaf(Condition::no_less_than, Rational(hi->floor() + 1))};
        return out;
      }
      break;
    case Condition::equal_to:
      if (auto* v = num(0)) return leaf(Condition::not_equal_to, *v);
      break;
    case Condition::not_equal_to:
      if (auto* v = num(0)) return leaf(Condition::equal_to, *v);
      break;
    default:
      break;
  }
  return std::nullopt;
}

std::optional<std::string> plan_satisfying(std::span<const Predicate> predicates, std::uint64_t seed,
                                           const PlannerOptions& options) {
  const auto ctx = make_context(predicates);
  auto result = solve(ctx, seed, options);
  if (!result) return std::nullopt;
  return result->text;
}

std::optional<PlannedPair> plan_pair(std::span<const Predicate> predicates, std::uint64_t seed,
                                     const PlannerOptions& options) {
  if (predicates.empty()) return std::nullopt;
  const auto ctx = make_context(predicates);
  auto canonical = solve(ctx, seed, options);
  if (!canonical) return std::nullopt;
  const std::size_t n = predicates.size();
  const std::size_t first = static_cast<std::size_t>(mix_seed(seed, 7) % n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t target = (first + k) % n;
    const Objective objective{&ctx, target, negate(predicates[target])};
    for (std::size_t r = 0; r < options.restarts; ++r) {
      Rng rng(mix_seed(seed, 200 + target * 16 + r));
      auto result = search(canonical->plan, ctx, objective, rng, options.max_iterations);
      if (result.cost == 0 && all_hold(predicates, result.text, ctx, target)) {
        return PlannedPair{canonical->text, result.text, target};
      }
    }
  }
  return std::nullopt;
}

}  // namespace ergkit
