#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace rpmguard {

// The 16 observation symbols, in stable code order. Codes are load-bearing:
// trained models, serialized documents and the wire formats all assume them.
enum Symbol : int {
  kBdOpen = 0,
  kBdClose = 1,
  kFdOpen = 2,
  kFdClose = 3,
  kScOff = 4,
  kSc1 = 5,
  kSc2 = 6,
  kSc3 = 7,
  kOxOff = 8,
  kOx1 = 9,
  kOx2 = 10,
  kOx3 = 11,
  kPh2On = 12,
  kPh2Off = 13,
  kPh1In = 14,
  kPh1Out = 15,
};

inline constexpr int kAlphabetSize = 16;
inline constexpr std::string_view kAlphabetVersion = "rpm16.v1";

enum class DeviceKind {
  kBedroomDoor,
  kFridgeDoor,
  kScale,
  kOximeter,
  kPhone2,
  kPhone1,
};

// Symbol code for a name like "bd_open"; throws AlphabetMismatchError.
int symbol_code(std::string_view name);

// Name for a code in [0, 16); throws AlphabetMismatchError otherwise.
const std::string& symbol_name(int code);

// All 16 names in code order.
const std::vector<std::string>& symbol_names();

DeviceKind device_kind_from_string(std::string_view name);
const std::string& device_kind_name(DeviceKind kind);

// The symbols a device of this kind may legally emit.
const std::vector<int>& legal_symbols(DeviceKind kind);

bool symbol_legal_for(DeviceKind kind, int code);

// True for devices that report numeric readings (oximeter, scale).
bool has_readings(DeviceKind kind);

// The device kind owning a symbol code.
DeviceKind owning_device(int code);

}  // namespace rpmguard
