#pragma once

#include <cstdint>
#include <span>

namespace peacock::crc32 {

// CRC-32/IEEE: reflected polynomial 0xEDB88320, init and final xor 0xFFFFFFFF.
// The same checksum UEFI table headers carry (and malware recomputes to mask edits).
uint32_t compute(std::span<const uint8_t> data);

}  // namespace peacock::crc32
