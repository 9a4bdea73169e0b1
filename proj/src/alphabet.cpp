#include "rpmguard/alphabet.hpp"

#include <map>

#include "rpmguard/errors.hpp"

namespace rpmguard {

namespace {

const std::vector<std::string> kNames = {
    "bd_open", "bd_close", "fd_open", "fd_close", "sc_off",  "sc1",
    "sc2",     "sc3",      "ox_off",  "ox1",      "ox2",     "ox3",
    "ph2_on",  "ph2_off",  "ph1_in",  "ph1_out"};

const std::map<std::string, int, std::less<>>& code_index() {
  static const std::map<std::string, int, std::less<>> index = [] {
    std::map<std::string, int, std::less<>> m;
    for (int i = 0; i < kAlphabetSize; ++i) m[kNames[i]] = i;
    return m;
  }();
  return index;
}

const std::map<std::string, DeviceKind, std::less<>> kKindIndex = {
    {"bedroom_door", DeviceKind::kBedroomDoor},
    {"fridge_door", DeviceKind::kFridgeDoor},
    {"scale", DeviceKind::kScale},
    {"oximeter", DeviceKind::kOximeter},
    {"phone2", DeviceKind::kPhone2},
    {"phone1", DeviceKind::kPhone1},
};

const std::map<DeviceKind, std::string> kKindNames = {
    {DeviceKind::kBedroomDoor, "bedroom_door"},
    {DeviceKind::kFridgeDoor, "fridge_door"},
    {DeviceKind::kScale, "scale"},
    {DeviceKind::kOximeter, "oximeter"},
    {DeviceKind::kPhone2, "phone2"},
    {DeviceKind::kPhone1, "phone1"},
};

const std::map<DeviceKind, std::vector<int>> kLegal = {
    {DeviceKind::kBedroomDoor, {kBdOpen, kBdClose}},
    {DeviceKind::kFridgeDoor, {kFdOpen, kFdClose}},
    {DeviceKind::kScale, {kScOff, kSc1, kSc2, kSc3}},
    {DeviceKind::kOximeter, {kOxOff, kOx1, kOx2, kOx3}},
    {DeviceKind::kPhone2, {kPh2On, kPh2Off}},
    {DeviceKind::kPhone1, {kPh1In, kPh1Out}},
};

}  // namespace

int symbol_code(std::string_view name) {
  const auto& index = code_index();
  auto it = index.find(name);
  if (it == index.end()) {
    throw AlphabetMismatchError("unknown symbol '" + std::string(name) + "'");
  }
  return it->second;
}

const std::string& symbol_name(int code) {
  if (code < 0 || code >= kAlphabetSize) {
    throw AlphabetMismatchError("symbol code " + std::to_string(code) +
                                " outside alphabet [0, 16)");
  }
  return kNames[static_cast<std::size_t>(code)];
}

const std::vector<std::string>& symbol_names() { return kNames; }

DeviceKind device_kind_from_string(std::string_view name) {
  auto it = kKindIndex.find(name);
  if (it == kKindIndex.end()) {
    throw ParseError("unknown device kind '" + std::string(name) + "'");
  }
  return it->second;
}

const std::string& device_kind_name(DeviceKind kind) {
  return kKindNames.at(kind);
}

const std::vector<int>& legal_symbols(DeviceKind kind) {
  return kLegal.at(kind);
}

bool symbol_legal_for(DeviceKind kind, int code) {
  const auto& legal = kLegal.at(kind);
  for (int c : legal) {
    if (c == code) return true;
  }
  return false;
}

bool has_readings(DeviceKind kind) {
  return kind == DeviceKind::kScale || kind == DeviceKind::kOximeter;
}

DeviceKind owning_device(int code) {
  symbol_name(code);  // range check
  if (code <= kBdClose) return DeviceKind::kBedroomDoor;
  if (code <= kFdClose) return DeviceKind::kFridgeDoor;
  if (code <= kSc3) return DeviceKind::kScale;
  if (code <= kOx3) return DeviceKind::kOximeter;
  if (code <= kPh2Off) return DeviceKind::kPhone2;
  return DeviceKind::kPhone1;
}

}  // namespace rpmguard
