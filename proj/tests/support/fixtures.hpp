#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "practica/scenario_format.hpp"
#include "practica/session_service.hpp"

namespace fixtures {

inline std::filesystem::path source_dir() { return PRACTICA_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }
inline std::filesystem::path test_data_dir() { return source_dir() / "tests" / "data"; }

inline const practica::Catalog& catalog() {
    static const practica::Catalog c = practica::Catalog::load(data_dir());
    return c;
}

inline std::shared_ptr<const practica::Catalog> shared_catalog() {
    static const auto c = std::make_shared<const practica::Catalog>(practica::Catalog::load(data_dir()));
    return c;
}

inline const practica::SocialPractice& practice(const std::string& id) { return catalog().library.at(id); }
inline const practica::Scenario& anamnesis() { return catalog().scenario("anamnesis"); }

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() / ("practica-" + tag + "-" + practica::new_session_id());
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures
