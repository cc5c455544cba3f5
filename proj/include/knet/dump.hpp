#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "knet/corpus.hpp"

namespace knet {

/// Random access into a MediaWiki "pages-articles-multistream" dump.
///
/// The index file (bz2, lines "offset:page_id:title") maps every title to the
/// byte offset of the bz2 stream holding its page. Only the streams that hold
/// requested pages are decompressed; a stream ends where the next indexed
/// offset begins.
class DumpReader {
 public:
  DumpReader(std::filesystem::path dump_path, const std::filesystem::path& index_path);

  bool contains(const std::string& title) const;
  std::size_t indexed_titles() const { return title_offset_.size(); }

  /// Calls `visit` for every wanted title present in the dump, in stream
  /// order. Titles without an index entry are collected in `missing()`.
  /// Throws knet::Error naming the byte offset of a malformed stream.
  void for_each(const std::set<std::string>& wanted, const std::function<void(RawArticle)>& visit);

  /// Wanted articles plus, for wanted redirects, their targets (one level).
  std::vector<RawArticle> read(const std::set<std::string>& wanted);

  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::string decompress_stream(std::uint64_t offset) const;

  std::filesystem::path dump_path_;
  std::uint64_t dump_size_ = 0;
  std::map<std::string, std::uint64_t> title_offset_;
  std::vector<std::uint64_t> stream_offsets_;
  std::vector<std::string> missing_;
};

/// Convenience wrapper over DumpReader::read.
std::vector<RawArticle> read_dump(const std::filesystem::path& dump_path,
                                  const std::filesystem::path& index_path,
                                  const std::set<std::string>& wanted);

/// Writes a multistream dump and its index in the enwiki layout (siteinfo
/// stream, page streams of `pages_per_stream` pages, closing stream).
void write_multistream_dump(std::span<const RawArticle> pages, const std::filesystem::path& dump_path,
                            const std::filesystem::path& index_path, std::size_t pages_per_stream = 100);

struct DumpIngestRequest {
  std::filesystem::path dump_path;
  std::filesystem::path index_path;
  std::vector<std::string> subjects;  // read from "Index of <subject>" pages
  std::vector<std::string> nobel_pages;
};

/// Default laureate list pages used for the prize comparison.
std::vector<std::string> default_nobel_pages();

/// Builds a Corpus straight from a dump: subject indices, member articles
/// (redirects resolved one level) and the prize link set.
Corpus ingest_dump(const DumpIngestRequest& request);

/// Pages parsed out of a decompressed chunk of dump XML.
std::vector<RawArticle> parse_dump_pages(std::string_view xml);

}  // namespace knet
