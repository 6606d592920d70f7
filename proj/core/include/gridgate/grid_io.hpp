#pragma once

#include <stdexcept>
#include <string>

#include "gridgate/grid.hpp"

namespace gridgate {

/// Malformed document syntax (not parseable at all).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structurally valid document with a wrong field type, a missing required
/// field, an unknown enum value, or a duplicated id.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A cross-reference (node id, line-kind name, ...) that does not resolve.
struct ReferenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses a grid file (JSON document, schema described in the README).
/// Optional attributes that are absent stay absent on the returned Grid;
/// rule-validation reports them. Dangling references are hard errors.
Grid parse_grid(const std::string& path);
Grid parse_grid_text(const std::string& text);

/// Inverse of parse_grid_text: emits a canonical document such that
/// parse_grid_text(serialize_grid(g)) == g. Output is deterministic.
std::string serialize_grid(const Grid& grid);

/// Emits the DGS-flavored interchange document: '## TYPE', '## ELEMENT' and
/// '## GRAPHIC' sections, one record per line as semicolon-separated
/// key=value pairs, records sorted by id. Byte-deterministic.
std::string export_dgs(const Grid& grid);

}  // namespace gridgate
