#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace fuchsim::zircon {

/// One 64-byte ChaCha20 block (20 rounds, 96-bit nonce, 32-bit counter).
void chacha20_block(const std::array<uint8_t, 32>& key, uint32_t counter,
                    const std::array<uint8_t, 12>& nonce,
                    std::array<uint8_t, 64>& out);

/// Keystream bytes for a draw: the 64-bit draw nonce fills the first
/// eight nonce bytes little-endian, the block counter starts at zero.
std::vector<uint8_t> chacha20_keystream(const std::array<uint8_t, 32>& key,
                                        uint64_t draw_nonce, size_t n);

}  // namespace fuchsim::zircon
