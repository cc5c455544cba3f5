#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace knet {

/// Calendar year; negative values are BCE.
using Year = std::int64_t;

/// Latest year accepted from parsed text. Later numbers are treated as noise.
inline constexpr Year kMaxParsedYear = 2019;
/// Year given to nodes that stay undated after imputation.
inline constexpr Year kDefaultYear = 2020;

enum class Provenance { parsed, imputed, defaulted, simulated };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// One page of a dump, before any markup processing.
struct RawArticle {
  std::string title;
  std::string wikitext;
  std::optional<std::string> redirect_target;
};

struct ParsedArticle {
  std::string title;
  std::string lead_text;
  std::vector<std::string> lead_links;
  std::optional<std::string> history_text;
  std::vector<Year> parsed_years;  // ascending

  bool operator==(const ParsedArticle&) const = default;
};

struct SubjectIndex {
  std::string subject;
  std::set<std::string> member_titles;
};

struct NobelNodeSet {
  std::set<std::string> prize_titles;
};

// ---- wikitext -------------------------------------------------------------

/// MediaWiki title normalization: drops the "#anchor", turns underscores into
/// spaces, collapses runs of whitespace and uppercases the first character.
/// Returns an empty string for targets that are not article links (files,
/// categories, other namespaces, interwiki prefixes, same-page anchors).
std::string canonicalize_title(std::string_view raw);

/// Plain text of a wikitext fragment. Templates, references, comments, tables
/// and file links are removed; `[[target|label]]` becomes `label`. Canonical
/// link targets are appended to `links` (without duplicates) when non-null.
std::string strip_markup(std::string_view wikitext, std::vector<std::string>* links = nullptr);

struct LeadSection {
  std::string lead_text;
  std::vector<std::string> lead_links;
  std::optional<std::string> history_text;
};

/// Lead = everything before the first line starting with "==". History is
/// the body of the first section whose heading contains "history".
LeadSection extract_lead(std::string_view wikitext);

// ---- years ----------------------------------------------------------------

/// Years mentioned in `text`, in textual order. A number counts as a year when
/// it follows a month, a preposition of time, "and", "the" or
/// "early/mid/late", or when it carries a BC/BCE/AD/CE/MYA suffix. Ordinal
/// centuries map to their first year ("19th century" -> 1800). BC/BCE values
/// are negated; MYA values become -N * 10^6. Years after kMaxParsedYear are
/// dropped.
std::vector<Year> parse_years(std::string_view text);

struct BirthYear {
  Year year = kDefaultYear;
  Provenance provenance = Provenance::defaulted;
};

/// Birth year per node. `edges` are (source, target) with source the
/// hyperlinked article, so a node's parents are the sources of its in-edges.
/// Dated nodes take their earliest parsed year; two imputation passes give an
/// undated node 1 + the latest dated parent; the rest get kDefaultYear.
std::vector<BirthYear> assign_birth_years(std::span<const std::vector<Year>> parsed_years,
                                          std::span<const std::pair<int, int>> edges);

// ---- subject indices and prize lists -------------------------------------

/// Members of an "Index of ..." page: every article link in the page body.
/// `redirects` maps redirect titles to their targets (one level).
/// Throws knet::Error("empty subject index") when the page has no links.
SubjectIndex resolve_subject(std::string subject, std::string_view index_wikitext,
                             const std::map<std::string, std::string>& redirects = {});

/// Union of link targets in the Rationale column of laureate tables.
/// Throws knet::Error naming the page when it has no such table.
NobelNodeSet parse_nobel_lists(std::span<const RawArticle> laureate_pages);

ParsedArticle parse_article(const RawArticle& raw);

// ---- mini-corpus file ------------------------------------------------------

struct Corpus {
  std::vector<ParsedArticle> articles;  // sorted by title
  std::map<std::string, SubjectIndex> subjects;
  NobelNodeSet nobel;

  const ParsedArticle* find(std::string_view title) const;
};

/// Reads the documented mini-corpus schema. Articles with `"years": null`
/// get their years parsed from lead and history text. Throws SchemaError.
Corpus corpus_from_json(const nlohmann::json& j);
nlohmann::json corpus_to_json(const Corpus& corpus);
Corpus read_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// File-system friendly name for a subject ("evolutionary biology" ->
/// "evolutionary_biology").
std::string subject_slug(std::string_view subject);

}  // namespace knet
