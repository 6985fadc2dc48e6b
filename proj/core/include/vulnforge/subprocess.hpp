#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vulnforge {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;

  bool ok() const { return exit_code == 0; }
};

struct ProcessOptions {
  std::optional<std::filesystem::path> cwd;
  std::string input;  // written to stdin, then stdin is closed
};

/// Runs argv[0] (resolved through PATH) without a shell, capturing both
/// streams. Throws Error{ProcessError} if the program cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

/// True if `program` resolves to an executable (absolute path or on PATH).
bool program_available(const std::string& program);

}  // namespace vulnforge
