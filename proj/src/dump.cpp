#include "knet/dump.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <boost/iostreams/copy.hpp>
#include <boost/iostreams/device/array.hpp>
#include <boost/iostreams/device/back_inserter.hpp>
#include <boost/iostreams/filter/bzip2.hpp>
#include <boost/iostreams/filtering_stream.hpp>

#include "knet/error.hpp"

namespace knet {

namespace io = boost::iostreams;

namespace {

std::string bz2_decompress(std::string_view compressed) {
  std::string out;
  io::filtering_istream in;
  in.push(io::bzip2_decompressor());
  in.push(io::array_source(compressed.data(), compressed.size()));
  io::copy(in, io::back_inserter(out));
  return out;
}

std::string bz2_compress(std::string_view plain) {
  std::string out;
  {
    io::filtering_ostream o;
    o.push(io::bzip2_compressor());
    o.push(io::back_inserter(out));
    o.write(plain.data(), static_cast<std::streamsize>(plain.size()));
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string xml_unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos) {
      out += s[i];
      continue;
    }
    const std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "amp") out += '&';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else if (!name.empty() && name[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = name.size() > 1 && name[1] == 'x' ? std::stoul(std::string(name.substr(2)), nullptr, 16)
                                                : std::stoul(std::string(name.substr(1)));
      } catch (const std::exception&) {
        out += s.substr(i, semi - i + 1);
        i = semi;
        continue;
      }
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
    } else {
      out += s.substr(i, semi - i + 1);
    }
    i = semi;
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string_view element_text(std::string_view page, std::string_view tag) {
  const std::string open = "<" + std::string(tag);
  auto start = page.find(open);
  while (start != std::string_view::npos) {
    const char after = page.size() > start + open.size() ? page[start + open.size()] : '\0';
    if (after == '>' || after == ' ' || after == '/') break;
    start = page.find(open, start + 1);
  }
  if (start == std::string_view::npos) return {};
  const auto gt = page.find('>', start);
  if (gt == std::string_view::npos || page[gt - 1] == '/') return {};
  const std::string close = "</" + std::string(tag) + ">";
  const auto end = page.find(close, gt);
  if (end == std::string_view::npos) return {};
  return page.substr(gt + 1, end - gt - 1);
}

}  // namespace

std::vector<RawArticle> parse_dump_pages(std::string_view xml) {
  std::vector<RawArticle> pages;
  std::size_t pos = 0;
  while (true) {
    const auto start = xml.find("<page>", pos);
    if (start == std::string_view::npos) break;
    const auto end = xml.find("</page>", start);
    if (end == std::string_view::npos) throw Error("unterminated <page> element");
    const std::string_view page = xml.substr(start, end - start);
    RawArticle a;
    a.title = xml_unescape(element_text(page, "title"));
    const auto redirect = page.find("<redirect title=\"");
    if (redirect != std::string_view::npos) {
      const auto q = page.find('"', redirect + 17);
      if (q != std::string_view::npos) {
        a.redirect_target = canonicalize_title(xml_unescape(page.substr(redirect + 17, q - redirect - 17)));
      }
    }
    a.wikitext = xml_unescape(element_text(page, "text"));
    pages.push_back(std::move(a));
    pos = end + 7;
  }
  return pages;
}

DumpReader::DumpReader(std::filesystem::path dump_path, const std::filesystem::path& index_path)
    : dump_path_(std::move(dump_path)) {
  if (!std::filesystem::exists(dump_path_)) throw Error("dump not found: " + dump_path_.string());
  dump_size_ = std::filesystem::file_size(dump_path_);
  std::string index;
  try {
    index = bz2_decompress(read_file(index_path));
  } catch (const std::ios_base::failure& e) {
    throw Error("malformed index " + index_path.string() + ": " + e.what());
  }
  std::istringstream lines(index);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c1 = line.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(':', c1 + 1);
    if (c2 == std::string::npos) {
      throw Error("malformed index line " + std::to_string(lineno) + " in " + index_path.string());
    }
    const std::uint64_t offset = std::stoull(line.substr(0, c1));
    const std::string title = canonicalize_title(line.substr(c2 + 1));
    if (!title.empty()) title_offset_.emplace(title, offset);
    stream_offsets_.push_back(offset);
  }
  std::sort(stream_offsets_.begin(), stream_offsets_.end());
  stream_offsets_.erase(std::unique(stream_offsets_.begin(), stream_offsets_.end()), stream_offsets_.end());
}

bool DumpReader::contains(const std::string& title) const {
  return title_offset_.count(canonicalize_title(title)) > 0;
}

std::string DumpReader::decompress_stream(std::uint64_t offset) const {
  const auto next = std::upper_bound(stream_offsets_.begin(), stream_offsets_.end(), offset);
  const std::uint64_t end = next == stream_offsets_.end() ? dump_size_ : *next;
  if (offset >= dump_size_ || end > dump_size_ || end <= offset) {
    throw Error("malformed stream at byte offset " + std::to_string(offset) + ": outside the dump");
  }
  std::ifstream in(dump_path_, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(offset));
  std::string compressed(end - offset, '\0');
  in.read(compressed.data(), static_cast<std::streamsize>(compressed.size()));
  if (!in) throw Error("short read at byte offset " + std::to_string(offset));
  try {
    return bz2_decompress(compressed);
  } catch (const std::exception& e) {
    throw Error("malformed stream at byte offset " + std::to_string(offset) + ": " + e.what());
  }
}

void DumpReader::for_each(const std::set<std::string>& wanted, const std::function<void(RawArticle)>& visit) {
  missing_.clear();
  std::map<std::uint64_t, std::set<std::string>> by_stream;
  for (const auto& t : wanted) {
    const std::string title = canonicalize_title(t);
    const auto it = title_offset_.find(title);
    if (it == title_offset_.end()) {
      missing_.push_back(title);
    } else {
      by_stream[it->second].insert(title);
    }
  }
  for (const auto& [offset, titles] : by_stream) {
    const std::string xml = decompress_stream(offset);
    std::vector<RawArticle> pages;
    try {
      pages = parse_dump_pages(xml);
    } catch (const Error& e) {
      throw Error("malformed stream at byte offset " + std::to_string(offset) + ": " + e.what());
    }
    for (auto& page : pages) {
      page.title = canonicalize_title(page.title);
      if (titles.count(page.title)) visit(std::move(page));
    }
  }
}

std::vector<RawArticle> DumpReader::read(const std::set<std::string>& wanted) {
  std::vector<RawArticle> out;
  for_each(wanted, [&](RawArticle a) { out.push_back(std::move(a)); });
  std::vector<std::string> missing = missing_;
  std::set<std::string> have;
  for (const auto& a : out) have.insert(a.title);
  std::set<std::string> targets;
  for (const auto& a : out) {
    if (a.redirect_target && !have.count(*a.redirect_target)) targets.insert(*a.redirect_target);
  }
  if (!targets.empty()) {
    for_each(targets, [&](RawArticle a) { out.push_back(std::move(a)); });
    missing.insert(missing.end(), missing_.begin(), missing_.end());
  }
  missing_ = std::move(missing);
  return out;
}

std::vector<RawArticle> read_dump(const std::filesystem::path& dump_path,
                                  const std::filesystem::path& index_path,
                                  const std::set<std::string>& wanted) {
  if (wanted.empty()) return {};
  DumpReader reader(dump_path, index_path);
  return reader.read(wanted);
}

void write_multistream_dump(std::span<const RawArticle> pages, const std::filesystem::path& dump_path,
                            const std::filesystem::path& index_path, std::size_t pages_per_stream) {
  if (pages_per_stream == 0) throw RangeError("pages_per_stream must be positive");
  std::string dump;
  std::string index;
  dump += bz2_compress(
      "<mediawiki xmlns=\"http://www.mediawiki.org/xml/export-0.10/\" xml:lang=\"en\">\n"
      "  <siteinfo>\n    <sitename>Wikipedia</sitename>\n  </siteinfo>\n");
  std::uint64_t page_id = 1;
  for (std::size_t start = 0; start < pages.size(); start += pages_per_stream) {
    const std::uint64_t offset = dump.size();
    std::string xml;
    for (std::size_t k = start; k < std::min(pages.size(), start + pages_per_stream); ++k) {
      const auto& p = pages[k];
      xml += "  <page>\n    <title>" + xml_escape(p.title) + "</title>\n    <ns>0</ns>\n    <id>" +
             std::to_string(page_id) + "</id>\n";
      if (p.redirect_target) xml += "    <redirect title=\"" + xml_escape(*p.redirect_target) + "\" />\n";
      xml += "    <revision>\n      <text bytes=\"" + std::to_string(p.wikitext.size()) +
             "\" xml:space=\"preserve\">" + xml_escape(p.wikitext) + "</text>\n    </revision>\n  </page>\n";
      index += std::to_string(offset) + ":" + std::to_string(page_id) + ":" + p.title + "\n";
      ++page_id;
    }
    dump += bz2_compress(xml);
  }
  dump += bz2_compress("</mediawiki>\n");
  std::ofstream(dump_path, std::ios::binary) << dump;
  std::ofstream(index_path, std::ios::binary) << bz2_compress(index);
}

std::vector<std::string> default_nobel_pages() {
  return {"List of Nobel laureates in Physics", "List of Nobel laureates in Chemistry",
          "List of Nobel laureates in Physiology or Medicine"};
}

Corpus ingest_dump(const DumpIngestRequest& request) {
  DumpReader reader(request.dump_path, request.index_path);
  Corpus corpus;

  std::set<std::string> index_titles;
  for (const auto& s : request.subjects) index_titles.insert(canonicalize_title("Index of " + s));
  std::map<std::string, std::string> index_pages;
  for (auto& page : reader.read(index_titles)) index_pages.emplace(page.title, std::move(page.wikitext));
  for (const auto& t : reader.missing()) std::cerr << "warning: subject index not in dump: " << t << '\n';

  std::set<std::string> all_members;
  std::map<std::string, std::vector<std::string>> raw_links;
  for (const auto& s : request.subjects) {
    const auto it = index_pages.find(canonicalize_title("Index of " + s));
    if (it == index_pages.end()) continue;
    const auto index = resolve_subject(s, it->second);
    raw_links[s] = {index.member_titles.begin(), index.member_titles.end()};
    all_members.insert(index.member_titles.begin(), index.member_titles.end());
  }

  std::map<std::string, std::string> redirects;
  std::map<std::string, RawArticle> articles;
  for (auto& a : reader.read(all_members)) {
    if (a.redirect_target) {
      redirects.emplace(a.title, *a.redirect_target);
    } else {
      articles.emplace(a.title, std::move(a));
    }
  }
  for (const auto& [subject, titles] : raw_links) {
    SubjectIndex index;
    index.subject = subject;
    for (const auto& t : titles) {
      const auto r = redirects.find(t);
      const std::string resolved = r == redirects.end() ? t : r->second;
      if (articles.count(resolved)) index.member_titles.insert(resolved);
    }
    if (!index.member_titles.empty()) corpus.subjects.emplace(subject, std::move(index));
  }
  for (const auto& [title, raw] : articles) corpus.articles.push_back(parse_article(raw));
  std::sort(corpus.articles.begin(), corpus.articles.end(),
            [](const ParsedArticle& a, const ParsedArticle& b) { return a.title < b.title; });

  if (!request.nobel_pages.empty()) {
    std::set<std::string> wanted(request.nobel_pages.begin(), request.nobel_pages.end());
    const auto pages = reader.read(wanted);
    std::vector<RawArticle> lists;
    for (const auto& p : pages) {
      if (!p.redirect_target) lists.push_back(p);
    }
    if (!lists.empty()) corpus.nobel = parse_nobel_lists(lists);
    for (auto title : corpus.nobel.prize_titles) {
      const auto r = redirects.find(title);
      if (r != redirects.end()) {
        corpus.nobel.prize_titles.erase(title);
        corpus.nobel.prize_titles.insert(r->second);
      }
    }
  }
  return corpus;
}

}  // namespace knet
