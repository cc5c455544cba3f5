#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>

#include "knet/corpus.hpp"

namespace knet {

namespace {

constexpr int kTemplateDepthCap = 32;

// Namespaces and interwiki prefixes that never name an article.
constexpr std::array<std::string_view, 27> kNonArticlePrefixes = {
    "file",     "image",  "category", "wikipedia", "wp",      "help",     "template",
    "portal",   "special", "talk",    "user",      "media",   "wiktionary", "wikt",
    "draft",    "module", "mediawiki", "book",     "commons", "meta",     "wikisource",
    "wikiquote", "wikibooks", "wikinews", "wikiversity", "species", "timedtext"};

bool starts_with(std::string_view s, std::size_t i, std::string_view p) {
  return s.size() >= i + p.size() && s.compare(i, p.size(), p) == 0;
}

bool starts_with_ci(std::string_view s, std::size_t i, std::string_view p) {
  if (s.size() < i + p.size()) return false;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(s[i + k])) != p[k]) return false;
  }
  return true;
}

std::size_t find_ci(std::string_view s, std::string_view p, std::size_t from) {
  for (std::size_t i = from; i + p.size() <= s.size(); ++i) {
    if (starts_with_ci(s, i, p)) return i;
  }
  return std::string_view::npos;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// End (exclusive) of the template opening at i; depth beyond the cap is not
// tracked. Unterminated templates swallow the rest of the text.
std::size_t skip_template(std::string_view s, std::size_t i) {
  int depth = 0;
  std::size_t j = i;
  while (j < s.size()) {
    if (starts_with(s, j, "{{")) {
      if (depth < kTemplateDepthCap) ++depth;
      j += 2;
    } else if (starts_with(s, j, "}}")) {
      --depth;
      j += 2;
      if (depth <= 0) return j;
    } else {
      ++j;
    }
  }
  return s.size();
}

std::size_t skip_table(std::string_view s, std::size_t i) {
  int depth = 0;
  std::size_t j = i;
  while (j < s.size()) {
    if (starts_with(s, j, "{|")) {
      ++depth;
      j += 2;
    } else if (starts_with(s, j, "|}")) {
      --depth;
      j += 2;
      if (depth <= 0) return j;
    } else if (starts_with(s, j, "{{")) {
      j = skip_template(s, j);
    } else {
      ++j;
    }
  }
  return s.size();
}

// End (exclusive) of the [[...]] opening at i, or npos when unbalanced.
std::size_t find_link_end(std::string_view s, std::size_t i) {
  int depth = 0;
  std::size_t j = i;
  while (j < s.size()) {
    if (starts_with(s, j, "[[")) {
      ++depth;
      j += 2;
    } else if (starts_with(s, j, "]]")) {
      --depth;
      j += 2;
      if (depth == 0) return j;
    } else if (starts_with(s, j, "{{")) {
      j = skip_template(s, j);
    } else {
      ++j;
    }
  }
  return std::string_view::npos;
}

// Position of the first '|' at nesting depth zero, or npos.
std::size_t find_top_level_pipe(std::string_view s) {
  int links = 0;
  int templates = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (starts_with(s, j, "[[")) {
      ++links;
      ++j;
    } else if (starts_with(s, j, "]]")) {
      --links;
      ++j;
    } else if (starts_with(s, j, "{{")) {
      ++templates;
      ++j;
    } else if (starts_with(s, j, "}}")) {
      --templates;
      ++j;
    } else if (s[j] == '|' && links == 0 && templates == 0) {
      return j;
    }
  }
  return std::string_view::npos;
}

bool is_namespace_target(std::string_view target) {
  target = trim(target);
  if (!target.empty() && target.front() == ':') target.remove_prefix(1);
  const auto colon = target.find(':');
  if (colon == std::string_view::npos) return false;
  const std::string_view raw_prefix = trim(target.substr(0, colon));
  const std::string prefix = to_lower_ascii(raw_prefix);
  if (std::find(kNonArticlePrefixes.begin(), kNonArticlePrefixes.end(), prefix) !=
      kNonArticlePrefixes.end()) {
    return true;
  }
  // Language interwiki such as "fr:" or "zh-yue:", written in lowercase.
  if (prefix == "simple") return true;
  const auto dash = raw_prefix.find('-');
  const std::string_view code = raw_prefix.substr(0, dash);
  return code.size() >= 2 && code.size() <= 3 &&
         std::all_of(raw_prefix.begin(), raw_prefix.end(), [](char c) {
           return std::islower(static_cast<unsigned char>(c)) || c == '-';
         });
}

void append_utf8(std::string& out, unsigned cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Decodes the HTML entity at s[i] == '&'. Returns consumed length, 0 if none.
std::size_t decode_entity(std::string_view s, std::size_t i, std::string& out) {
  const auto semi = s.find(';', i);
  if (semi == std::string_view::npos || semi - i > 10) return 0;
  const std::string_view name = s.substr(i + 1, semi - i - 1);
  if (name.empty()) return 0;
  if (name[0] == '#') {
    unsigned cp = 0;
    const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
    const std::string_view digits = name.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    for (char c : digits) {
      if (hex ? !std::isxdigit(static_cast<unsigned char>(c)) : !std::isdigit(static_cast<unsigned char>(c))) {
        return 0;
      }
      cp = cp * (hex ? 16 : 10) +
           static_cast<unsigned>(std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                                                                             : (std::tolower(c) - 'a' + 10));
      if (cp > 0x10FFFF) return 0;
    }
    append_utf8(out, cp);
    return semi - i + 1;
  }
  static constexpr std::array<std::pair<std::string_view, unsigned>, 10> kNamed = {{
      {"nbsp", ' '},
      {"amp", '&'},
      {"lt", '<'},
      {"gt", '>'},
      {"quot", '"'},
      {"apos", '\''},
      {"ndash", 0x2013},
      {"mdash", 0x2014},
      {"minus", 0x2212},
      {"thinsp", ' '},
  }};
  for (const auto& [n, cp] : kNamed) {
    if (name == n) {
      append_utf8(out, cp);
      return semi - i + 1;
    }
  }
  return 0;
}

// Elements whose content is never prose.
constexpr std::array<std::string_view, 9> kDroppedElements = {
    "ref", "math", "gallery", "timeline", "score", "syntaxhighlight", "source", "imagemap", "chem"};

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
    } else {
      if (space && !out.empty()) out += ' ';
      space = false;
      out += c;
    }
  }
  return out;
}

void add_link(std::vector<std::string>* links, const std::string& canonical) {
  if (links == nullptr || canonical.empty()) return;
  if (std::find(links->begin(), links->end(), canonical) == links->end()) links->push_back(canonical);
}

void strip_into(std::string_view s, std::string& out, std::vector<std::string>* links) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const char c = s[i];
    if (c == '<') {
      if (starts_with(s, i, "<!--")) {
        const auto end = s.find("-->", i + 4);
        i = end == std::string_view::npos ? n : end + 3;
        continue;
      }
      bool dropped = false;
      for (std::string_view el : kDroppedElements) {
        if (starts_with_ci(s, i + 1, el)) {
          const std::size_t after = i + 1 + el.size();
          if (after < n && (s[after] == '>' || s[after] == ' ' || s[after] == '/' || s[after] == '\t')) {
            const auto close = s.find('>', after);
            if (close == std::string_view::npos) {
              i = n;
            } else if (s[close - 1] == '/') {
              i = close + 1;
            } else {
              const std::string closing = "</" + std::string(el);
              const auto end = find_ci(s, closing, close);
              if (end == std::string_view::npos) {
                i = n;
              } else {
                const auto gt = s.find('>', end);
                i = gt == std::string_view::npos ? n : gt + 1;
              }
            }
            dropped = true;
            break;
          }
        }
      }
      if (dropped) continue;
      if (i + 1 < n && (std::isalpha(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '/')) {
        const auto gt = s.find('>', i);
        if (gt != std::string_view::npos) {
          out += ' ';
          i = gt + 1;
          continue;
        }
      }
      out += c;
      ++i;
    } else if (starts_with(s, i, "{{")) {
      i = skip_template(s, i);
    } else if (starts_with(s, i, "{|") && (i == 0 || s[i - 1] == '\n')) {
      i = skip_table(s, i);
    } else if (starts_with(s, i, "[[")) {
      const auto end = find_link_end(s, i);
      if (end == std::string_view::npos) {
        i += 2;
        continue;
      }
      const std::string_view inner = s.substr(i + 2, end - i - 4);
      const auto pipe = find_top_level_pipe(inner);
      const std::string_view target = pipe == std::string_view::npos ? inner : inner.substr(0, pipe);
      i = end;
      if (is_namespace_target(target)) continue;
      const std::string canonical = canonicalize_title(target);
      add_link(links, canonical);
      if (pipe != std::string_view::npos && !trim(inner.substr(pipe + 1)).empty()) {
        strip_into(inner.substr(pipe + 1), out, links);
      } else {
        std::string_view shown = target;
        const auto hash = shown.find('#');
        if (hash != std::string_view::npos && hash > 0) shown = shown.substr(0, hash);
        out += trim(shown);
      }
    } else if (c == '[' && (starts_with_ci(s, i + 1, "http") || starts_with(s, i + 1, "//"))) {
      const auto close = s.find(']', i);
      if (close == std::string_view::npos) {
        ++i;
        continue;
      }
      const std::string_view inner = s.substr(i + 1, close - i - 1);
      const auto space = inner.find(' ');
      if (space != std::string_view::npos) strip_into(inner.substr(space + 1), out, links);
      i = close + 1;
    } else if (starts_with(s, i, "''")) {
      while (i < n && s[i] == '\'') ++i;
    } else if (starts_with(s, i, "__")) {
      // Magic words such as __NOTOC__.
      std::size_t j = i + 2;
      while (j < n && std::isupper(static_cast<unsigned char>(s[j]))) ++j;
      if (j > i + 2 && starts_with(s, j, "__")) {
        i = j + 2;
      } else {
        out += c;
        ++i;
      }
    } else if (c == '&') {
      const auto used = decode_entity(s, i, out);
      if (used == 0) {
        out += c;
        ++i;
      } else {
        i += used;
      }
    } else {
      out += c;
      ++i;
    }
  }
}

struct Heading {
  std::size_t line_start;
  std::size_t body_start;
  int level;
  std::string title;
};

std::vector<Heading> find_headings(std::string_view s) {
  std::vector<Heading> headings;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto eol = s.find('\n', pos);
    if (eol == std::string_view::npos) eol = s.size();
    const std::string_view line = trim(s.substr(pos, eol - pos));
    if (line.size() >= 2 && line.front() == '=' && line.back() == '=') {
      std::size_t lead = 0;
      while (lead < line.size() && line[lead] == '=') ++lead;
      std::size_t tail = 0;
      while (tail < line.size() && line[line.size() - 1 - tail] == '=') ++tail;
      if (lead + tail < line.size()) {
        const int level = static_cast<int>(std::min(lead, tail));
        headings.push_back({pos, std::min(eol + 1, s.size()), level,
                            std::string(trim(line.substr(lead, line.size() - lead - tail)))});
      }
    }
    if (eol == s.size()) break;
    pos = eol + 1;
  }
  return headings;
}

}  // namespace

std::string canonicalize_title(std::string_view raw) {
  std::string_view t = trim(raw);
  if (!t.empty() && t.front() == ':') t.remove_prefix(1);
  if (is_namespace_target(t)) return {};
  const auto hash = t.find('#');
  if (hash != std::string_view::npos) t = t.substr(0, hash);
  std::string spaced;
  spaced.reserve(t.size());
  for (char c : t) spaced += (c == '_') ? ' ' : c;
  std::string out = collapse_whitespace(spaced);
  if (out.empty()) return {};
  if (out.find_first_of("<>[]{}|") != std::string::npos) return {};
  out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::string strip_markup(std::string_view wikitext, std::vector<std::string>* links) {
  std::string out;
  out.reserve(wikitext.size());
  strip_into(wikitext, out, links);
  return collapse_whitespace(out);
}

LeadSection extract_lead(std::string_view wikitext) {
  LeadSection result;
  std::size_t lead_end = wikitext.size();
  if (starts_with(wikitext, 0, "==")) {
    lead_end = 0;
  } else {
    const auto p = wikitext.find("\n==");
    if (p != std::string_view::npos) lead_end = p;
  }
  result.lead_text = strip_markup(wikitext.substr(0, lead_end), &result.lead_links);

  const auto headings = find_headings(wikitext);
  for (std::size_t h = 0; h < headings.size(); ++h) {
    if (to_lower_ascii(headings[h].title).find("history") == std::string::npos) continue;
    std::size_t body_end = wikitext.size();
    for (std::size_t k = h + 1; k < headings.size(); ++k) {
      if (headings[k].level <= headings[h].level) {
        body_end = headings[k].line_start;
        break;
      }
    }
    // Body of the section with its sub-heading lines left out.
    std::string body;
    std::size_t pos = std::min(headings[h].body_start, body_end);
    for (std::size_t k = h + 1; k < headings.size() && headings[k].line_start < body_end; ++k) {
      body.append(wikitext.substr(pos, headings[k].line_start - pos));
      body += '\n';
      pos = headings[k].body_start;
    }
    body.append(wikitext.substr(pos, body_end - pos));
    result.history_text = strip_markup(body);
    break;
  }
  return result;
}

}  // namespace knet
