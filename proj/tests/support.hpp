#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "mergeir/ir_data.hpp"
#include "mergeir/tensor.hpp"

// Shared fixtures for the test binaries.

namespace testsupport {

/// Unique scratch directory, removed on destruction.
class TempDir {
  public:
    TempDir() {
        static std::atomic<std::uint64_t> counter{0};
        const auto id = counter.fetch_add(1);
        path_ = std::filesystem::temp_directory_path() /
                ("mergeir_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(id));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const {
        return (path_ / name).string();
    }
    std::string dir() const { return path_.string(); }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

inline mergeir::Tensor make_tensor(const std::string& name,
                                   std::vector<std::uint64_t> shape,
                                   std::vector<float> data) {
    mergeir::Tensor t;
    t.name = name;
    t.shape = std::move(shape);
    t.data = std::move(data);
    return t;
}

inline mergeir::Run make_run(
    const std::string& tag,
    const std::map<std::string, std::vector<mergeir::ScoredDoc>>& rankings) {
    mergeir::Run run;
    run.tag = tag;
    run.rankings = rankings;
    return run;
}

}  // namespace testsupport
