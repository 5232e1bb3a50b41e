#pragma once

#include <string>

#include "spotscan/raster.hpp"

namespace spotscan {

// Decodes an 8-bit RGB or RGBA PNG. With RGBA, alpha is the content mask:
// validity is set where alpha is nonzero. RGB files are fully valid.
// Throws std::runtime_error (message includes the path) on unreadable
// files, non-PNG data, or unsupported bit depth / color type.
SrgbRaster load_page(const std::string& path, int dpi = 600);

// Writes an 8-bit RGBA PNG, alpha 255 where valid and 0 elsewhere.
// load_page(save_page(r)) preserves pixels and validity bit-exactly.
void save_page(const SrgbRaster& raster, const std::string& path);

}  // namespace spotscan
