#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tokx/rng.hpp"
#include "tokx/utf8.hpp"

namespace testutil {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path &path, std::string_view content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
}

// Unique scratch directory per test run, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string &tag) {
        dir_ = fs::temp_directory_path() / ("tokx-test-" + tag + "-" + std::to_string(counter()++));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    const fs::path &path() const { return dir_; }
    fs::path operator/(const std::string &name) const { return dir_ / name; }

  private:
    static int &counter() {
        static int n = 0;
        return n;
    }
    fs::path dir_;
};

// Random valid UTF-8 mixing ASCII, CJK, Latin-1 and astral codepoints.
inline std::string random_utf8(tokx::Rng &rng, std::size_t max_scalars) {
    std::size_t n = rng.below(max_scalars + 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        char32_t cp = 0;
        switch (rng.below(6)) {
            case 0: cp = static_cast<char32_t>('a' + rng.below(26)); break;
            case 1: cp = static_cast<char32_t>(0x4E00 + rng.below(0x200)); break;
            case 2: cp = static_cast<char32_t>(0x3400 + rng.below(0x80)); break;
            case 3: cp = static_cast<char32_t>(0x00A1 + rng.below(0x50)); break;
            case 4: cp = static_cast<char32_t>(0x1F300 + rng.below(0x40)); break;
            default: cp = static_cast<char32_t>(' ' + rng.below(15)); break;
        }
        tokx::utf8::append(out, cp);
    }
    return out;
}

// Small random corpus with a skewed character distribution so that BPE
// has realistic merge structure.
inline std::vector<std::string> random_corpus(tokx::Rng &rng, std::size_t docs, std::size_t doc_scalars) {
    std::vector<char32_t> alphabet;
    std::size_t alpha_n = 3 + rng.below(12);
    for (std::size_t i = 0; i < alpha_n; ++i) {
        if (rng.below(2) == 0)
            alphabet.push_back(static_cast<char32_t>('a' + rng.below(6)));
        else
            alphabet.push_back(static_cast<char32_t>(0x4E00 + rng.below(24)));
    }
    std::vector<std::string> corpus;
    for (std::size_t d = 0; d < docs; ++d) {
        std::string doc;
        std::size_t n = 1 + rng.below(doc_scalars);
        for (std::size_t i = 0; i < n; ++i) {
            // Zipf-ish skew toward the first alphabet entries
            std::size_t idx = rng.below(alphabet.size());
            idx = std::min(idx, rng.below(alphabet.size()));
            tokx::utf8::append(doc, alphabet[idx]);
            if (rng.below(12) == 0) doc.push_back(' ');
        }
        corpus.push_back(std::move(doc));
    }
    return corpus;
}

} // namespace testutil
