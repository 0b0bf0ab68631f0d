#pragma once

#include <string>

#include "mrw/model.hpp"

namespace mrw {

// model file: JSON object with "name", "states", "transitions", "kernels" and optional "family"
ModelSpec parse_model_json(const std::string& text, const std::string& source = "<input>");
ModelSpec read_model_file(const std::string& path);
// finite specs only
ojson model_spec_to_json(const ModelSpec& spec);

}  // namespace mrw
