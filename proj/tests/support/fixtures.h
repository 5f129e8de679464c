// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trajsql/corpus/seed.h"
#include "trajsql/eval/engine.h"
#include "trajsql/schema/database.h"

namespace trajsql::testing {

std::filesystem::path data_dir();
std::filesystem::path fixture(const std::string& relative);
std::string read_text(const std::filesystem::path& p);

const SchemaCatalog& catalog();
const DatabaseInput& schema(const std::string& name);
std::vector<SeedExample> seeds();
/// A fresh directory handle over the shipped fixture databases.
DatabaseDirectory databases();

/// Unique empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace trajsql::testing
