#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "qrag/pinyin.hpp"
#include "qrag/unicode.hpp"

namespace testsupport {

inline std::filesystem::path data_dir() { return QRAG_DATA_DIR; }
inline std::filesystem::path cli_path() { return QRAG_CLI_PATH; }
inline std::filesystem::path repo_dir() { return QRAG_REPO_DIR; }

// The shipped reading table, loaded once per test binary.
inline const qrag::PinyinTable& pinyin_table() {
    static qrag::PinyinTable table = qrag::load_table(data_dir() / "pinyin_table.tsv");
    return table;
}

// Unique temp directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("qrag_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string shell_quote(const std::string& arg) {
    std::string quoted = "'";
    for (char c : arg) {
        if (c == '\'') quoted += "'\\''";
        else quoted += c;
    }
    quoted += "'";
    return quoted;
}

// Runs the qrag binary with the given arguments, capturing both streams.
inline CommandResult run_cli(const std::vector<std::string>& args) {
    TempDir capture;
    std::string command = shell_quote(cli_path().string());
    for (const std::string& arg : args) command += " " + shell_quote(arg);
    command += " >" + shell_quote(capture.file("out").string());
    command += " 2>" + shell_quote(capture.file("err").string());

    int status = std::system(command.c_str());
    CommandResult result;
    result.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    result.out = read_file(capture.file("out"));
    result.err = read_file(capture.file("err"));
    return result;
}

// Naive recursive edit distance — the independent oracle. Exponential, keep
// sequences short.
inline std::size_t recursive_levenshtein(const std::vector<char32_t>& a,
                                         const std::vector<char32_t>& b, std::size_t i,
                                         std::size_t j) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    std::size_t best = recursive_levenshtein(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, recursive_levenshtein(a, b, i + 1, j) + 1);
    best = std::min(best, recursive_levenshtein(a, b, i, j + 1) + 1);
    return best;
}

inline std::size_t recursive_levenshtein(const std::string& a, const std::string& b) {
    return recursive_levenshtein(qrag::decode_utf8(a), qrag::decode_utf8(b), 0, 0);
}

// Characters whose tone-stripped first readings are pairwise distinct and
// each shared with at least one other character in the table, so every pool
// character has a registered homophone and distinct pool texts always map to
// distinct syllable sequences.
inline std::vector<char32_t> homophone_pool(const qrag::PinyinTable& table, std::size_t count,
                                            char32_t from = 0x4E00, char32_t to = 0x6000) {
    std::vector<char32_t> pool;
    std::vector<std::string> used_syllables;
    for (char32_t ch = from; ch < to && pool.size() < count; ++ch) {
        if (!table.contains(ch)) continue;
        if (table.homophones(ch).empty()) continue;
        auto reading = table.first_reading(ch);
        if (!reading) continue;
        std::string base = *reading;
        while (!base.empty() && base.back() >= '0' && base.back() <= '9') base.pop_back();
        bool clash = false;
        for (const std::string& seen : used_syllables) {
            if (seen == base) {
                clash = true;
                break;
            }
        }
        if (clash) continue;
        used_syllables.push_back(base);
        pool.push_back(ch);
    }
    return pool;
}

// length distinct pool characters per text, all texts distinct.
inline std::vector<std::string> synthetic_texts(const std::vector<char32_t>& pool,
                                                std::size_t count, std::size_t length,
                                                std::mt19937& rng) {
    std::vector<std::string> texts;
    std::vector<char32_t> chars(pool);
    std::vector<std::string> seen;
    while (texts.size() < count) {
        std::shuffle(chars.begin(), chars.end(), rng);
        std::string text;
        for (std::size_t i = 0; i < length; ++i) qrag::append_utf8(text, chars[i]);
        bool duplicate = false;
        for (const std::string& s : seen) {
            if (s == text) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        seen.push_back(text);
        texts.push_back(text);
    }
    return texts;
}

}  // namespace testsupport
