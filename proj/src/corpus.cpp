#include "knet/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>

#include "knet/error.hpp"
#include "json_io.hpp"

namespace knet {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::parsed:
      return "parsed";
    case Provenance::imputed:
      return "imputed";
    case Provenance::defaulted:
      return "default";
    case Provenance::simulated:
      return "simulated";
  }
  return "default";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "parsed") return Provenance::parsed;
  if (s == "imputed") return Provenance::imputed;
  if (s == "default") return Provenance::defaulted;
  if (s == "simulated") return Provenance::simulated;
  throw SchemaError("provenance", "unknown value '" + std::string(s) + "'");
}

std::vector<BirthYear> assign_birth_years(std::span<const std::vector<Year>> parsed_years,
                                          std::span<const std::pair<int, int>> edges) {
  const std::size_t n = parsed_years.size();
  std::vector<BirthYear> out(n);
  std::vector<bool> dated(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (!parsed_years[v].empty()) {
      out[v] = {*std::min_element(parsed_years[v].begin(), parsed_years[v].end()), Provenance::parsed};
      dated[v] = true;
    }
  }
  std::vector<std::vector<int>> parents(n);
  for (const auto& [source, target] : edges) {
    if (source < 0 || target < 0 || static_cast<std::size_t>(source) >= n ||
        static_cast<std::size_t>(target) >= n) {
      throw Error("assign_birth_years: edge endpoint out of range");
    }
    parents[static_cast<std::size_t>(target)].push_back(source);
  }
  // Each pass reads the dates fixed before it started.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<std::pair<std::size_t, Year>> updates;
    for (std::size_t v = 0; v < n; ++v) {
      if (dated[v]) continue;
      bool any = false;
      Year latest = 0;
      for (int p : parents[v]) {
        if (!dated[static_cast<std::size_t>(p)]) continue;
        const Year y = out[static_cast<std::size_t>(p)].year;
        latest = any ? std::max(latest, y) : y;
        any = true;
      }
      if (any) updates.emplace_back(v, latest + 1);
    }
    for (const auto& [v, y] : updates) {
      out[v] = {y, Provenance::imputed};
      dated[v] = true;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!dated[v]) out[v] = {kDefaultYear, Provenance::defaulted};
  }
  return out;
}

SubjectIndex resolve_subject(std::string subject, std::string_view index_wikitext,
                             const std::map<std::string, std::string>& redirects) {
  std::vector<std::string> links;
  strip_markup(index_wikitext, &links);
  SubjectIndex index;
  index.subject = std::move(subject);
  for (const auto& link : links) {
    const auto it = redirects.find(link);
    index.member_titles.insert(it == redirects.end() ? link : it->second);
  }
  if (index.member_titles.empty()) throw Error("empty subject index: " + index.subject);
  return index;
}

namespace {

struct TableCell {
  std::string text;
  bool header = false;
  int rowspan = 1;
  int colspan = 1;
};

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits on `sep` ("||" or "!!") outside [[...]] and {{...}}.
std::vector<std::string> split_cells(std::string_view s, std::string_view sep) {
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.compare(i, 2, "[[") == 0 || s.compare(i, 2, "{{") == 0) {
      ++depth;
      ++i;
    } else if (s.compare(i, 2, "]]") == 0 || s.compare(i, 2, "}}") == 0) {
      --depth;
      ++i;
    } else if (depth <= 0 && s.compare(i, sep.size(), sep) == 0) {
      parts.emplace_back(s.substr(start, i - start));
      start = i + sep.size();
      i += sep.size() - 1;
    }
  }
  parts.emplace_back(s.substr(start));
  return parts;
}

int span_attribute(std::string_view attrs, const char* name) {
  const std::regex re(std::string(name) + R"(\s*=\s*["']?\s*(\d+))", std::regex::icase);
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(attrs.begin(), attrs.end(), m, re)) return std::max(1, std::stoi(m[1].str()));
  return 1;
}

TableCell make_cell(std::string_view raw, bool header) {
  TableCell cell;
  cell.header = header;
  // "attrs | content": a single pipe outside links and templates.
  int depth = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.compare(i, 2, "[[") == 0 || raw.compare(i, 2, "{{") == 0) {
      ++depth;
      ++i;
    } else if (raw.compare(i, 2, "]]") == 0 || raw.compare(i, 2, "}}") == 0) {
      --depth;
      ++i;
    } else if (depth <= 0 && raw[i] == '|') {
      const std::string_view attrs = raw.substr(0, i);
      if (attrs.find('=') != std::string_view::npos) {
        cell.rowspan = span_attribute(attrs, "rowspan");
        cell.colspan = span_attribute(attrs, "colspan");
        cell.text = std::string(trim_view(raw.substr(i + 1)));
        return cell;
      }
      break;
    }
  }
  cell.text = std::string(trim_view(raw));
  return cell;
}

using Row = std::vector<TableCell>;

std::vector<Row> parse_table_rows(std::string_view table) {
  std::vector<Row> rows(1);
  std::size_t pos = 0;
  bool first = true;
  while (pos < table.size()) {
    auto eol = table.find('\n', pos);
    if (eol == std::string_view::npos) eol = table.size();
    const std::string_view line = trim_view(table.substr(pos, eol - pos));
    pos = eol + 1;
    if (first) {
      first = false;  // "{| class=..."
      continue;
    }
    if (line.starts_with("|}")) break;
    if (line.starts_with("|+")) continue;
    if (line.starts_with("|-")) {
      if (!rows.back().empty()) rows.emplace_back();
      continue;
    }
    if (line.starts_with("!")) {
      for (const auto& c : split_cells(line.substr(1), "!!")) {
        for (const auto& d : split_cells(c, "||")) rows.back().push_back(make_cell(d, true));
      }
    } else if (line.starts_with("|")) {
      for (const auto& c : split_cells(line.substr(1), "||")) rows.back().push_back(make_cell(c, false));
    } else if (!rows.back().empty()) {
      rows.back().back().text += "\n";
      rows.back().back().text += line;
    }
  }
  if (rows.back().empty()) rows.pop_back();
  return rows;
}

// Top-level "{| ... |}" blocks.
std::vector<std::string_view> find_tables(std::string_view s) {
  std::vector<std::string_view> tables;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto open = s.find("{|", i);
    if (open == std::string_view::npos) break;
    int depth = 0;
    std::size_t j = open;
    std::size_t end = s.size();
    while (j < s.size()) {
      if (s.compare(j, 2, "{|") == 0) {
        ++depth;
        j += 2;
      } else if (s.compare(j, 2, "|}") == 0) {
        --depth;
        j += 2;
        if (depth == 0) {
          end = j;
          break;
        }
      } else {
        ++j;
      }
    }
    tables.push_back(s.substr(open, end - open));
    i = end;
  }
  return tables;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Collects Rationale-column links from one table. Returns false if the table
// has no Rationale header.
bool collect_rationale_links(std::string_view table, std::set<std::string>& out) {
  const auto rows = parse_table_rows(table);
  std::size_t header_row = rows.size();
  int rationale_col = -1;
  for (std::size_t r = 0; r < rows.size() && rationale_col < 0; ++r) {
    int col = 0;
    for (const auto& cell : rows[r]) {
      if (cell.header && lower(strip_markup(cell.text)).find("rationale") != std::string::npos) {
        rationale_col = col;
        header_row = r;
        break;
      }
      col += cell.colspan;
    }
  }
  if (rationale_col < 0) return false;

  // Grid placement honouring rowspan and colspan.
  std::vector<int> carry;  // further rows each column stays occupied
  for (std::size_t r = header_row + 1; r < rows.size(); ++r) {
    std::vector<int> next_carry(carry.size(), 0);
    for (std::size_t c = 0; c < carry.size(); ++c) next_carry[c] = std::max(0, carry[c] - 1);
    std::size_t col = 0;
    for (const auto& cell : rows[r]) {
      while (col < carry.size() && carry[col] > 0) ++col;
      const std::size_t width = static_cast<std::size_t>(cell.colspan);
      if (carry.size() < col + width) {
        carry.resize(col + width, 0);
        next_carry.resize(col + width, 0);
      }
      if (static_cast<int>(col) <= rationale_col && rationale_col < static_cast<int>(col + width) &&
          !cell.header) {
        std::vector<std::string> links;
        strip_markup(cell.text, &links);
        out.insert(links.begin(), links.end());
      }
      for (std::size_t k = col; k < col + width; ++k) next_carry[k] = cell.rowspan - 1;
      col += width;
    }
    carry = std::move(next_carry);
  }
  return true;
}

}  // namespace

NobelNodeSet parse_nobel_lists(std::span<const RawArticle> laureate_pages) {
  NobelNodeSet set;
  for (const auto& page : laureate_pages) {
    bool found = false;
    for (const auto table : find_tables(page.wikitext)) {
      found = collect_rationale_links(table, set.prize_titles) || found;
    }
    if (!found) throw Error("no laureates table with a Rationale column in page '" + page.title + "'");
  }
  return set;
}

ParsedArticle parse_article(const RawArticle& raw) {
  ParsedArticle a;
  a.title = canonicalize_title(raw.title);
  if (a.title.empty()) throw Error("article has an invalid title: '" + raw.title + "'");
  auto lead = extract_lead(raw.wikitext);
  a.lead_text = std::move(lead.lead_text);
  a.lead_links = std::move(lead.lead_links);
  std::erase(a.lead_links, a.title);
  a.history_text = std::move(lead.history_text);
  std::string text = a.lead_text;
  if (a.history_text) text += "\n" + *a.history_text;
  a.parsed_years = parse_years(text);
  std::sort(a.parsed_years.begin(), a.parsed_years.end());
  return a;
}

const ParsedArticle* Corpus::find(std::string_view title) const {
  const auto it = std::lower_bound(articles.begin(), articles.end(), title,
                                   [](const ParsedArticle& a, std::string_view t) { return a.title < t; });
  if (it == articles.end() || it->title != title) return nullptr;
  return &*it;
}

namespace {

using detail::require;
using detail::require_string;

std::vector<std::string> canonical_titles(const nlohmann::json& arr, const std::string& field) {
  if (!arr.is_array()) throw SchemaError(field, "expected an array of titles");
  std::vector<std::string> out;
  for (const auto& t : arr) {
    if (!t.is_string()) throw SchemaError(field, "expected a string title");
    const auto c = canonicalize_title(t.get<std::string>());
    if (!c.empty() && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

}  // namespace

Corpus corpus_from_json(const nlohmann::json& j) {
  Corpus corpus;
  const auto& articles = require(j, "articles", "");
  if (!articles.is_array()) throw SchemaError("articles", "expected an array");
  for (std::size_t i = 0; i < articles.size(); ++i) {
    const auto& a = articles[i];
    const std::string where = "articles[" + std::to_string(i) + "].";
    ParsedArticle p;
    p.title = canonicalize_title(require_string(a, "title", where));
    if (p.title.empty()) throw SchemaError(where + "title", "empty or invalid title");
    p.lead_text = require_string(a, "lead", where);
    p.lead_links = canonical_titles(require(a, "links", where), where + "links");
    std::erase(p.lead_links, p.title);
    if (a.contains("history") && !a.at("history").is_null()) {
      if (!a.at("history").is_string()) throw SchemaError(where + "history", "expected string or null");
      p.history_text = a.at("history").get<std::string>();
    }
    if (a.contains("years") && !a.at("years").is_null()) {
      const auto& ys = a.at("years");
      if (!ys.is_array()) throw SchemaError(where + "years", "expected an array of integers or null");
      for (const auto& y : ys) {
        if (!y.is_number_integer()) throw SchemaError(where + "years", "expected integer years");
        p.parsed_years.push_back(y.get<Year>());
      }
    } else {
      std::string text = p.lead_text;
      if (p.history_text) text += "\n" + *p.history_text;
      p.parsed_years = parse_years(text);
    }
    std::sort(p.parsed_years.begin(), p.parsed_years.end());
    corpus.articles.push_back(std::move(p));
  }
  std::sort(corpus.articles.begin(), corpus.articles.end(),
            [](const ParsedArticle& a, const ParsedArticle& b) { return a.title < b.title; });
  for (std::size_t i = 1; i < corpus.articles.size(); ++i) {
    if (corpus.articles[i].title == corpus.articles[i - 1].title) {
      throw SchemaError("articles", "duplicate title '" + corpus.articles[i].title + "'");
    }
  }

  if (j.contains("subjects")) {
    const auto& subjects = j.at("subjects");
    if (!subjects.is_object()) throw SchemaError("subjects", "expected an object of title arrays");
    for (const auto& [name, titles] : subjects.items()) {
      SubjectIndex index;
      index.subject = name;
      for (auto& t : canonical_titles(titles, "subjects." + name)) index.member_titles.insert(std::move(t));
      if (index.member_titles.empty()) throw SchemaError("subjects." + name, "empty subject index");
      corpus.subjects.emplace(name, std::move(index));
    }
  }
  if (j.contains("nobel")) {
    for (auto& t : canonical_titles(j.at("nobel"), "nobel")) corpus.nobel.prize_titles.insert(std::move(t));
  }
  return corpus;
}

nlohmann::json corpus_to_json(const Corpus& corpus) {
  nlohmann::json j;
  j["articles"] = nlohmann::json::array();
  for (const auto& a : corpus.articles) {
    nlohmann::json ja;
    ja["title"] = a.title;
    ja["lead"] = a.lead_text;
    ja["links"] = a.lead_links;
    ja["history"] = a.history_text ? nlohmann::json(*a.history_text) : nlohmann::json(nullptr);
    ja["years"] = a.parsed_years;
    j["articles"].push_back(std::move(ja));
  }
  j["subjects"] = nlohmann::json::object();
  for (const auto& [name, index] : corpus.subjects) {
    j["subjects"][name] = std::vector<std::string>(index.member_titles.begin(), index.member_titles.end());
  }
  j["nobel"] = std::vector<std::string>(corpus.nobel.prize_titles.begin(), corpus.nobel.prize_titles.end());
  return j;
}

Corpus read_corpus(const std::filesystem::path& path) { return corpus_from_json(detail::read_json_file(path)); }

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  detail::write_json_file(corpus_to_json(corpus), path);
}

std::string subject_slug(std::string_view subject) {
  std::string out;
  for (char c : subject) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "subject" : out;
}

}  // namespace knet
