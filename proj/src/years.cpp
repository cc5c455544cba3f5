#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

#include "knet/corpus.hpp"

namespace knet {

namespace {

enum class TokKind { word, number, ordinal };

struct Token {
  TokKind kind = TokKind::word;
  std::string word;        // lowercase letters for words
  double value = 0.0;      // numbers and ordinals
  int digits = 0;          // digit count of the integer part
  bool plain = true;       // integer without separators or decimals
  bool decade = false;     // "1920s"
  bool dash_before = false;  // joined to the previous token by a dash
};

constexpr std::array<std::string_view, 21> kMonths = {
    "january", "february", "march", "april", "may", "june", "july",
    "august",  "september", "october", "november", "december", "jan",
    "feb",     "mar",      "apr",     "jun",     "jul",     "aug",  "sep", "sept"};

// Plus the "oct", "nov", "dec" abbreviations, checked separately to keep the
// table above readable.
constexpr std::array<std::string_view, 3> kMonthTail = {"oct", "nov", "dec"};

constexpr std::array<std::string_view, 29> kTimeWords = {
    "in",     "on",     "at",     "by",      "around",  "about",         "circa",  "c",
    "ca",     "before", "after",  "since",   "until",   "till",          "from",   "to",
    "during", "between", "through", "approximately", "near", "past",    "within", "as",
    "early",  "mid",    "late",   "and",     "the"};

bool is_month(std::string_view w) {
  return std::find(kMonths.begin(), kMonths.end(), w) != kMonths.end() ||
         std::find(kMonthTail.begin(), kMonthTail.end(), w) != kMonthTail.end();
}

bool is_time_word(std::string_view w) {
  return std::find(kTimeWords.begin(), kTimeWords.end(), w) != kTimeWords.end();
}

bool is_bc(std::string_view w) { return w == "bc" || w == "bce"; }
bool is_ad(std::string_view w) { return w == "ad" || w == "ce"; }

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_dash_at(std::string_view s, std::size_t i) {
  if (s[i] == '-') return true;
  // en dash U+2013 and em dash U+2014.
  return i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
         static_cast<unsigned char>(s[i + 1]) == 0x80 &&
         (static_cast<unsigned char>(s[i + 2]) == 0x93 || static_cast<unsigned char>(s[i + 2]) == 0x94);
}

std::vector<Token> tokenize_for_years(std::string_view s) {
  std::vector<Token> tokens;
  bool dash = false;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (is_letter(c)) {
      Token t;
      // Dotted abbreviations: "b.c.e." -> "bce", "a.d." -> "ad".
      std::size_t j = i;
      while (j < s.size() && is_letter(s[j])) {
        t.word += static_cast<char>(std::tolower(static_cast<unsigned char>(s[j])));
        ++j;
      }
      while (t.word.size() <= 3 && j + 1 < s.size() && s[j] == '.' && is_letter(s[j + 1]) &&
             (j + 2 >= s.size() || !is_letter(s[j + 2]))) {
        t.word += static_cast<char>(std::tolower(static_cast<unsigned char>(s[j + 1])));
        j += 2;
      }
      t.dash_before = dash;
      dash = false;
      tokens.push_back(std::move(t));
      i = j;
    } else if (is_digit(c)) {
      Token t;
      t.kind = TokKind::number;
      std::string digits;
      std::size_t j = i;
      while (j < s.size() && is_digit(s[j])) digits += s[j++];
      t.digits = static_cast<int>(digits.size());
      // Thousands separators.
      while (j + 3 < s.size() + 0 && s[j] == ',' && is_digit(s[j + 1]) && is_digit(s[j + 2]) &&
             is_digit(s[j + 3]) && (j + 4 >= s.size() || !is_digit(s[j + 4]))) {
        digits += s.substr(j + 1, 3);
        j += 4;
        t.plain = false;
      }
      double value = std::stod(digits);
      if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
        std::string frac = "0.";
        ++j;
        while (j < s.size() && is_digit(s[j])) frac += s[j++];
        value += std::stod(frac);
        t.plain = false;
      }
      t.value = value;
      // Glued suffixes.
      std::string suffix;
      std::size_t k = j;
      while (k < s.size() && is_letter(s[k])) {
        suffix += static_cast<char>(std::tolower(static_cast<unsigned char>(s[k])));
        ++k;
      }
      if (suffix == "st" || suffix == "nd" || suffix == "rd" || suffix == "th") {
        t.kind = TokKind::ordinal;
        j = k;
      } else if (suffix == "s") {
        t.decade = true;
        j = k;
      } else if (!suffix.empty() && !is_bc(suffix) && !is_ad(suffix) && suffix != "mya") {
        t.plain = false;  // "3d", "x2": not a year
      }
      t.dash_before = dash;
      dash = false;
      tokens.push_back(std::move(t));
      i = j;
    } else {
      if (is_dash_at(s, i)) {
        dash = true;
        i += (s[i] == '-') ? 1 : 3;
        continue;
      }
      if (!std::isspace(static_cast<unsigned char>(c))) dash = false;
      ++i;
    }
  }
  return tokens;
}

}  // namespace

std::vector<Year> parse_years(std::string_view text) {
  const auto tokens = tokenize_for_years(text);
  std::vector<Year> years;
  std::vector<bool> emitted(tokens.size(), false);
  auto word_at = [&](std::size_t k) -> std::string_view {
    return k < tokens.size() && tokens[k].kind == TokKind::word ? std::string_view(tokens[k].word)
                                                                : std::string_view();
  };

  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const Token& t = tokens[k];
    if (t.kind == TokKind::word) continue;
    const std::string_view next = word_at(k + 1);

    if (t.kind == TokKind::ordinal) {
      if (next != "century" && next != "centuries") continue;
      if (t.value < 1 || t.digits > 2) continue;
      Year y = static_cast<Year>((t.value - 1) * 100);
      if (is_bc(word_at(k + 2))) y = -y;
      years.push_back(y);
      emitted[k] = true;
      continue;
    }

    if (is_bc(next)) {
      if (t.value == std::floor(t.value)) {
        years.push_back(-static_cast<Year>(t.value));
        emitted[k] = true;
      }
      continue;
    }
    if (next == "mya") {
      years.push_back(-static_cast<Year>(std::llround(t.value * 1e6)));
      emitted[k] = true;
      continue;
    }
    if (!t.plain || t.digits > 4) continue;
    const Year value = static_cast<Year>(t.value);
    if (is_ad(next)) {
      years.push_back(value);
      emitted[k] = true;
      continue;
    }

    bool triggered = false;
    if (k > 0) {
      const Token& prev = tokens[k - 1];
      if (prev.kind == TokKind::word) {
        if (is_ad(prev.word)) {
          triggered = true;
        } else if ((is_time_word(prev.word) || is_month(prev.word)) && t.digits >= 3) {
          triggered = true;
        }
      } else if (prev.kind == TokKind::number && t.digits >= 3) {
        // "January 5, 1905" and ranges such as "1900-1910".
        const bool day_after_month = prev.plain && prev.digits <= 2 && prev.value >= 1 &&
                                     prev.value <= 31 && k >= 2 && is_month(word_at(k - 2));
        const bool range = t.dash_before && emitted[k - 1];
        triggered = day_after_month || range;
      }
    }
    if (triggered) {
      years.push_back(value);
      emitted[k] = true;
    }
  }

  std::erase_if(years, [](Year y) { return y > kMaxParsedYear; });
  return years;
}

}  // namespace knet
