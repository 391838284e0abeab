#pragma once
// Authoring formats: *.practice.json and *.scenario.json. Parsing reports
// every problem it can find with a source position; serialization is canonical
// so that parse(serialize(x)) == x.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "practica/core_model.hpp"
#include "practica/dialogue_engine.hpp"
#include "practica/document.hpp"
#include "practica/practice_selector.hpp"

namespace practica {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kPracticeExtension = ".practice.json";
inline constexpr std::string_view kScenarioExtension = ".scenario.json";

bool has_errors(const std::vector<Diagnostic>& diags);

struct PracticeDocument {
    std::optional<SocialPractice> practice;  // set only when there are no errors
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return practice.has_value(); }
};

struct ScenarioDocument {
    std::optional<Scenario> scenario;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return scenario.has_value(); }
};

PracticeDocument parse_practice(std::string_view text, std::string file = {});
ScenarioDocument parse_scenario(std::string_view text, std::string file = {});

doc::Value to_document(const SocialPractice& p);
doc::Value to_document(const Scenario& sc);
std::string serialize(const SocialPractice& p);
std::string serialize(const Scenario& sc);

class FormatError : public std::runtime_error {
public:
    explicit FormatError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

enum class DocumentKind { practice, scenario, unknown };
DocumentKind kind_of(const std::filesystem::path& path);

// Throws std::runtime_error when the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

// Diagnostics for one file, chosen by extension. Unreadable files yield an IO diagnostic.
std::vector<Diagnostic> validate_file(const std::filesystem::path& path);

// Throw FormatError on any error.
SocialPractice load_practice(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

// Every *.practice.json in `dir` (not recursive). Library-level problems are
// reported against the file of the offending practice.
PracticeLibrary load_library(const std::filesystem::path& dir);

// Every *.scenario.json in `dir`, keyed by scenario id.
std::vector<Scenario> load_scenarios(const std::filesystem::path& dir);

}  // namespace practica
