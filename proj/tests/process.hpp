#pragma once

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

struct ProcessResult {
    int code = -1;
    std::string out;
    std::string err;
};

inline std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Runs `exe args...` through the shell; stdout/stderr land in `scratch`.
inline ProcessResult run_process(const std::string& exe, const std::string& args,
                                 const std::filesystem::path& scratch) {
    const auto out = scratch / "stdout.txt", err = scratch / "stderr.txt";
    const std::string cmd = quote(exe) + " " + args + " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    ProcessResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

/// True when both trees hold the same relative paths with identical bytes.
inline bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b) {
    namespace fs = std::filesystem;
    auto listing = [](const fs::path& root) {
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
        std::sort(files.begin(), files.end());
        return files;
    };
    const auto la = listing(a), lb = listing(b);
    if (la != lb) return false;
    for (const auto& f : la)
        if (slurp(a / f) != slurp(b / f)) return false;
    return true;
}

}  // namespace testing
