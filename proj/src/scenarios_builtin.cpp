#include "peacock/scenario.hpp"
#include "peacock/errors.hpp"

// Builtin scenario corpus, embedded verbatim from the files under scenarios/.
// tests/test_scenarios.cpp asserts the two copies stay identical.

namespace peacock::sim {

namespace {

const char k_baseline[] = R"json({
  "name": "baseline",
  "firmware_meta": {
    "vendor": "TianoCore EDK II",
    "version": "2.10-sim.1",
    "release_date": "2024-05-01"
  },
  "tick_start": 3890000000,
  "tick_stride": 997,
  "images": [
    {
      "identity": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "origin": "FirmwareVolume",
      "start_address": "0x7E520000",
      "end_address": "0x7E59C000"
    },
    {
      "identity": "\\EFI\\Boot\\bootx64.efi",
      "origin": "ESP",
      "start_address": "0x7AC10000",
      "end_address": "0x7AD40000"
    }
  ],
  "actions": [
    {
      "type": "InvokeService",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "service": "LocateProtocol",
      "args": {
        "Protocol": "09576E91-6D3F-11D2-8E39-00A0C969723B",
        "Registration": "0",
        "Interface": "0"
      }
    },
    {
      "type": "GetVariable",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "name": "BootOrder",
      "vendor_guid": "8BE4DF61-93CA-11D2-AA0D-00E098032B8C"
    },
    {
      "type": "SetVariable",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "name": "BootCurrent",
      "vendor_guid": "8BE4DF61-93CA-11D2-AA0D-00E098032B8C",
      "data": "0000"
    },
    {
      "type": "CreateEventEx",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "group_guid": "7CE88FB3-4BD7-4679-87A8-A8D8DEE50D2B"
    },
    {
      "type": "LoadImage",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "image": "\\EFI\\Boot\\bootx64.efi"
    },
    {
      "type": "InvokeService",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "service": "StartImage",
      "args": {
        "Path": "\\EFI\\Boot\\bootx64.efi"
      }
    },
    {
      "type": "InvokeService",
      "actor": "\\EFI\\Boot\\bootx64.efi",
      "service": "LocateProtocol",
      "args": {
        "Protocol": "964E5B22-6459-11D2-8E39-00A0C969723B",
        "Registration": "0",
        "Interface": "0"
      }
    },
    {
      "type": "GetVariable",
      "actor": "\\EFI\\Boot\\bootx64.efi",
      "name": "SecureBoot",
      "vendor_guid": "8BE4DF61-93CA-11D2-AA0D-00E098032B8C"
    },
    {
      "type": "InvokeService",
      "actor": "\\EFI\\Boot\\bootx64.efi",
      "service": "ExitBootServices",
      "args": {}
    }
  ]
}
)json";

const char k_glupteba[] = R"json({
  "name": "glupteba",
  "firmware_meta": {
    "vendor": "TianoCore EDK II",
    "version": "2.10-sim.1",
    "release_date": "2024-05-01"
  },
  "tick_start": 3892000000,
  "tick_stride": 997,
  "images": [
    {
      "identity": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "origin": "FirmwareVolume",
      "start_address": "0x7E520000",
      "end_address": "0x7E59C000"
    },
    {
      "identity": "\\EFI\\BOOT\\BOOTX64.EFI",
      "origin": "ESP",
      "start_address": "0x7ABF6000",
      "end_address": "0x7AC01000"
    },
    {
      "identity": "\\EFI\\Boot\\EfiGuardDxe.efi",
      "origin": "ESP",
      "start_address": "0x7F62B000",
      "end_address": "0x7F67D000"
    },
    {
      "identity": "\\EFI\\Boot\\bootx64_orig.efi",
      "origin": "ESP",
      "start_address": "0x10000000",
      "end_address": "0x101C8000"
    }
  ],
  "actions": [
    {
      "type": "LoadImage",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "image": "\\EFI\\BOOT\\BOOTX64.EFI"
    },
    {
      "type": "InvokeService",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "service": "StartImage",
      "args": {
        "Path": "\\EFI\\BOOT\\BOOTX64.EFI"
      }
    },
    {
      "type": "LoadImage",
      "actor": "\\EFI\\BOOT\\BOOTX64.EFI",
      "image": "\\EFI\\Boot\\EfiGuardDxe.efi"
    },
    {
      "type": "InvokeService",
      "actor": "\\EFI\\BOOT\\BOOTX64.EFI",
      "service": "StartImage",
      "args": {
        "Path": "\\EFI\\Boot\\EfiGuardDxe.efi"
      }
    },
    {
      "type": "ExternalHook",
      "actor": "\\EFI\\Boot\\EfiGuardDxe.efi",
      "service": "LoadImage",
      "recompute_crc": true
    },
    {
      "type": "LoadImage",
      "actor": "\\EFI\\BOOT\\BOOTX64.EFI",
      "image": "\\EFI\\Boot\\bootx64_orig.efi"
    },
    {
      "type": "InvokeService",
      "actor": "\\EFI\\Boot\\EfiGuardDxe.efi",
      "service": "LoadImage",
      "args": {
        "Path": "\\EFI\\Boot\\Loader.efi",
        "ParentImage": "\\EFI\\Boot\\EfiGuardDxe.efi"
      }
    },
    {
      "type": "InvokeService",
      "actor": "\\EFI\\Boot\\bootx64_orig.efi",
      "service": "LoadImage",
      "args": {
        "Path": "\\EFI\\Microsoft\\Boot\\winload.efi",
        "ParentImage": "\\EFI\\Boot\\bootx64_orig.efi"
      }
    },
    {
      "type": "InvokeService",
      "actor": "\\EFI\\Boot\\bootx64_orig.efi",
      "service": "ExitBootServices",
      "args": {}
    }
  ]
}
)json";

const char k_blacklotus[] = R"json({
  "name": "blacklotus",
  "firmware_meta": {
    "vendor": "TianoCore EDK II",
    "version": "2.10-sim.1",
    "release_date": "2024-05-01"
  },
  "tick_start": 3894100000,
  "tick_stride": 997,
  "images": [
    {
      "identity": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "origin": "FirmwareVolume",
      "start_address": "0x7E520000",
      "end_address": "0x7E59C000"
    },
    {
      "identity": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi",
      "origin": "ESP",
      "start_address": "0x7A900000",
      "end_address": "0x7AAC8000"
    },
    {
      "identity": "\\EFI\\ubuntu\\grubx64.efi",
      "origin": "ESP",
      "start_address": "0x7B100000",
      "end_address": "0x7B2D0000"
    },
    {
      "identity": "ESP:\\system32\\bootload.efi",
      "origin": "ESP",
      "start_address": "0x7B400000",
      "end_address": "0x7B470000"
    }
  ],
  "actions": [
    {
      "type": "LoadImage",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "image": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi"
    },
    {
      "type": "InvokeService",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "service": "StartImage",
      "args": {
        "Path": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi"
      }
    },
    {
      "type": "LoadImage",
      "actor": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi",
      "image": "\\EFI\\ubuntu\\grubx64.efi"
    },
    {
      "type": "InvokeService",
      "actor": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi",
      "service": "StartImage",
      "args": {
        "Path": "\\EFI\\ubuntu\\grubx64.efi"
      }
    },
    {
      "type": "SetVariable",
      "actor": "\\EFI\\ubuntu\\grubx64.efi",
      "name": "MokList",
      "vendor_guid": "605DAB50-E046-4300-ABB6-3DD810DD8B23",
      "data": "mok-cert-blob"
    },
    {
      "type": "DropEspFile",
      "actor": "\\EFI\\ubuntu\\grubx64.efi",
      "path": "ESP:\\system32\\bootload.efi",
      "content": "4D5A-blacklotus-stage2"
    },
    {
      "type": "LoadImage",
      "actor": "\\EFI\\ubuntu\\grubx64.efi",
      "image": "ESP:\\system32\\bootload.efi"
    },
    {
      "type": "InvokeService",
      "actor": "\\EFI\\ubuntu\\grubx64.efi",
      "service": "StartImage",
      "args": {
        "Path": "ESP:\\system32\\bootload.efi"
      }
    },
    {
      "type": "SetVariable",
      "actor": "ESP:\\system32\\bootload.efi",
      "name": "VbsPolicyDisable",
      "vendor_guid": "8BE4DF61-93CA-11D2-AA0D-00E098032B8C",
      "data": "01"
    },
    {
      "type": "GetVariable",
      "actor": "ESP:\\system32\\bootload.efi",
      "name": "MokList",
      "vendor_guid": "605DAB50-E046-4300-ABB6-3DD810DD8B23"
    }
  ]
}
)json";

const char k_lojax[] = R"json({
  "name": "lojax",
  "firmware_meta": {
    "vendor": "TianoCore EDK II",
    "version": "2.10-sim.1",
    "release_date": "2024-05-01"
  },
  "tick_start": 3897200000,
  "tick_stride": 997,
  "images": [
    {
      "identity": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "origin": "FirmwareVolume",
      "start_address": "0x7E520000",
      "end_address": "0x7E59C000"
    },
    {
      "identity": "D4156B2D-9013-4AC6-B155-6F342A6C2C48",
      "origin": "FirmwareVolume",
      "start_address": "0x7E640000",
      "end_address": "0x7E6A0000"
    },
    {
      "identity": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi",
      "origin": "ESP",
      "start_address": "0x7A900000",
      "end_address": "0x7AAC8000"
    }
  ],
  "actions": [
    {
      "type": "CreateEventEx",
      "actor": "D4156B2D-9013-4AC6-B155-6F342A6C2C48",
      "group_guid": "7CE88FB3-4BD7-4679-87A8-A8D8DEE50D2B"
    },
    {
      "type": "InvokeService",
      "actor": "D4156B2D-9013-4AC6-B155-6F342A6C2C48",
      "service": "LocateHandleBuffer",
      "args": {
        "Protocol": "964E5B21-6459-11D2-8E39-00A0C969723B"
      }
    },
    {
      "type": "InvokeService",
      "actor": "D4156B2D-9013-4AC6-B155-6F342A6C2C48",
      "service": "LocateHandleBuffer",
      "args": {
        "Protocol": "CE345171-BA0B-11D2-8E4F-00A0C969723B"
      }
    },
    {
      "type": "InvokeService",
      "actor": "D4156B2D-9013-4AC6-B155-6F342A6C2C48",
      "service": "OpenProtocol",
      "args": {
        "Handle": "7FE00060",
        "Protocol": "964E5B21-6459-11D2-8E39-00A0C969723B",
        "Attributes": "EFI_OPEN_PROTOCOL_GET_PROTOCOL"
      }
    },
    {
      "type": "InvokeService",
      "actor": "D4156B2D-9013-4AC6-B155-6F342A6C2C48",
      "service": "OpenProtocol",
      "args": {
        "Handle": "7FE000C0",
        "Protocol": "CE345171-BA0B-11D2-8E4F-00A0C969723B",
        "Attributes": "EFI_OPEN_PROTOCOL_GET_PROTOCOL"
      }
    },
    {
      "type": "DropEspFile",
      "actor": "D4156B2D-9013-4AC6-B155-6F342A6C2C48",
      "path": "NTFS0:\\Windows\\System32\\rpcnetp.exe",
      "content": "4D5A-lojax-usermode-agent"
    },
    {
      "type": "LoadImage",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "image": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi"
    },
    {
      "type": "InvokeService",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "service": "StartImage",
      "args": {
        "Path": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi"
      }
    }
  ]
}
)json";

const char k_mosaicregressor[] = R"json({
  "name": "mosaicregressor",
  "firmware_meta": {
    "vendor": "TianoCore EDK II",
    "version": "2.10-sim.1",
    "release_date": "2024-05-01"
  },
  "tick_start": 3899300000,
  "tick_stride": 997,
  "images": [
    {
      "identity": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "origin": "FirmwareVolume",
      "start_address": "0x7E520000",
      "end_address": "0x7E59C000"
    },
    {
      "identity": "F5B2C101-3916-4D4A-A6F0-8C7D02E9B377",
      "origin": "FirmwareVolume",
      "start_address": "0x7E700000",
      "end_address": "0x7E75C000"
    },
    {
      "identity": "0F7A1528-4C94-4E1B-966D-2D4BD1C2E0B8",
      "origin": "FirmwareVolume",
      "start_address": "0x7E7A0000",
      "end_address": "0x7E7E8000"
    },
    {
      "identity": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi",
      "origin": "ESP",
      "start_address": "0x7A900000",
      "end_address": "0x7AAC8000"
    }
  ],
  "actions": [
    {
      "type": "CreateEventEx",
      "actor": "F5B2C101-3916-4D4A-A6F0-8C7D02E9B377",
      "group_guid": "7CE88FB3-4BD7-4679-87A8-A8D8DEE50D2B"
    },
    {
      "type": "GetVariable",
      "actor": "F5B2C101-3916-4D4A-A6F0-8C7D02E9B377",
      "name": "fTA",
      "vendor_guid": "74AFC046-DDF0-45CB-9FD9-D0C5AE9DBA46"
    },
    {
      "type": "SetVariable",
      "actor": "F5B2C101-3916-4D4A-A6F0-8C7D02E9B377",
      "name": "fTA",
      "vendor_guid": "74AFC046-DDF0-45CB-9FD9-D0C5AE9DBA46",
      "data": "01"
    },
    {
      "type": "InvokeService",
      "actor": "0F7A1528-4C94-4E1B-966D-2D4BD1C2E0B8",
      "service": "HandleProtocol",
      "args": {
        "Handle": "7FE00060",
        "Protocol": "5B1B31A1-9562-11D2-8E3F-00A0C969723B"
      }
    },
    {
      "type": "DropEspFile",
      "actor": "0F7A1528-4C94-4E1B-966D-2D4BD1C2E0B8",
      "path": "NTFS0:\\ProgramData\\Microsoft\\WindowsStartup\\mosaic.exe",
      "content": "4D5A-mosaicregressor-payload"
    },
    {
      "type": "LoadImage",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "image": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi"
    },
    {
      "type": "InvokeService",
      "actor": "6D33944A-EC75-4855-A54D-809C75241F6C",
      "service": "StartImage",
      "args": {
        "Path": "\\EFI\\Microsoft\\Boot\\bootmgfw.efi"
      }
    }
  ]
}
)json";

}  // namespace

std::vector<std::string> builtin_scenario_names() {
    return {"baseline", "glupteba", "blacklotus", "lojax", "mosaicregressor"};
}

const std::string& builtin_scenario_json(const std::string& name) {
    if (name == "baseline") {
        static const std::string text = k_baseline;
        return text;
    }
    if (name == "glupteba") {
        static const std::string text = k_glupteba;
        return text;
    }
    if (name == "blacklotus") {
        static const std::string text = k_blacklotus;
        return text;
    }
    if (name == "lojax") {
        static const std::string text = k_lojax;
        return text;
    }
    if (name == "mosaicregressor") {
        static const std::string text = k_mosaicregressor;
        return text;
    }
    throw Error("unknown builtin scenario: " + name);
}

}  // namespace peacock::sim
