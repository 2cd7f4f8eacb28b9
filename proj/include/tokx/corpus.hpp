#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <glob.h>

#include "tokx/common.hpp"
#include "tokx/nfc.hpp"
#include "tokx/utf8.hpp"

namespace tokx::corpus {

// Where a corpus comes from and how it splits into documents. Text is
// kept raw by default; NFC is opt-in because normalization changes token
// statistics.
struct CorpusSource {
    std::vector<std::string> paths; // concrete files or glob(3) patterns
    std::string doc_separator = "\n\n";
    bool normalize_nfc = false;
};

struct CharStats {
    std::uint64_t total_chars = 0; // Unicode scalar values
    std::uint64_t total_bytes = 0;
    std::uint64_t cjk_chars = 0;
    std::uint64_t doc_count = 0;

    CharStats &operator+=(const CharStats &o) {
        total_chars += o.total_chars;
        total_bytes += o.total_bytes;
        cjk_chars += o.cjk_chars;
        doc_count += o.doc_count;
        return *this;
    }
    bool operator==(const CharStats &) const = default;
};

inline bool has_glob_magic(std::string_view p) {
    return p.find_first_of("*?[") != std::string_view::npos;
}

// Expands patterns and sorts the full list lexicographically so that
// iteration order never depends on filesystem enumeration order.
inline std::vector<std::string> expand_paths(const CorpusSource &source) {
    std::vector<std::string> files;
    for (const std::string &p : source.paths) {
        if (!has_glob_magic(p)) {
            if (!std::filesystem::exists(p)) throw IoError("no such file: " + p);
            files.push_back(p);
            continue;
        }
        glob_t g{};
        int rc = ::glob(p.c_str(), GLOB_ERR, nullptr, &g);
        if (rc == GLOB_NOMATCH) {
            ::globfree(&g);
            throw IoError("pattern matched no files: " + p);
        }
        if (rc != 0) {
            ::globfree(&g);
            throw IoError("glob failed for pattern: " + p);
        }
        for (std::size_t i = 0; i < g.gl_pathc; ++i) {
            if (std::filesystem::is_regular_file(g.gl_pathv[i])) files.emplace_back(g.gl_pathv[i]);
        }
        ::globfree(&g);
    }
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    return files;
}

inline std::string read_file_bytes(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read error: " + path);
    return bytes;
}

// Single-consumer document stream. Files are loaded one at a time,
// validated as UTF-8 (positioned error on the first bad byte), then split
// on the exact separator byte sequence. Empty segments are dropped.
class DocumentStream {
  public:
    explicit DocumentStream(CorpusSource source)
        : source_(std::move(source)), files_(expand_paths(source_)) {}

    // Next document, or nullopt at end of corpus.
    std::optional<std::string> next() {
        while (pending_.empty()) {
            if (file_index_ >= files_.size()) return std::nullopt;
            load_next_file();
        }
        std::string doc = std::move(pending_.front());
        pending_.erase(pending_.begin());
        return doc;
    }

    const std::vector<std::string> &files() const { return files_; }

  private:
    void load_next_file() {
        const std::string &path = files_[file_index_++];
        std::string bytes = read_file_bytes(path);
        if (auto bad = utf8::find_invalid(bytes)) throw EncodingError(path, *bad);

        const std::string &sep = source_.doc_separator;
        std::size_t pos = 0;
        while (pos <= bytes.size()) {
            std::size_t hit = sep.empty() ? std::string::npos : bytes.find(sep, pos);
            std::string_view piece;
            if (hit == std::string::npos) {
                piece = std::string_view(bytes).substr(pos);
                pos = bytes.size() + 1;
            } else {
                piece = std::string_view(bytes).substr(pos, hit - pos);
                pos = hit + sep.size();
            }
            if (!piece.empty())
                pending_.push_back(source_.normalize_nfc ? nfc::normalize(piece) : std::string(piece));
        }
    }

    CorpusSource source_;
    std::vector<std::string> files_;
    std::size_t file_index_ = 0;
    std::vector<std::string> pending_;
};

inline void for_each_document(const CorpusSource &source, const std::function<void(const std::string &)> &fn) {
    DocumentStream stream(source);
    while (auto doc = stream.next()) fn(*doc);
}

inline std::vector<std::string> load_corpus(const CorpusSource &source) {
    std::vector<std::string> docs;
    for_each_document(source, [&](const std::string &d) { docs.push_back(d); });
    return docs;
}

inline CharStats doc_stats(std::string_view doc) {
    CharStats s;
    s.doc_count = 1;
    s.total_bytes = doc.size();
    std::size_t pos = 0;
    while (pos < doc.size()) {
        utf8::DecodeResult r = utf8::decode_one(doc, pos);
        pos += r.length == 0 ? 1 : r.length;
        ++s.total_chars;
        if (utf8::is_cjk(r.cp)) ++s.cjk_chars;
    }
    return s;
}

inline CharStats char_stats(const CorpusSource &source) {
    CharStats total;
    for_each_document(source, [&](const std::string &d) { total += doc_stats(d); });
    return total;
}

} // namespace tokx::corpus
