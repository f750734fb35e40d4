// Copyright (c) 2026 The vtad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VTAD_CHECKPOINT_H_
#define VTAD_CHECKPOINT_H_

#include <string>

#include "vtad/catalog.h"
#include "vtad/diffnet.h"
#include "vtad/trainer.h"

namespace vtad {

struct Checkpoint {
  DiffNetParams params;
  std::string encoder_tag;
  TrainConfig config;  // echo of the training configuration
};

// Text container; every value is written in shortest round-trip form, so a
// save/load cycle reproduces the parameters bit for bit.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& contents, const DescriptorCatalog& catalog,
                            const std::string& source = "<memory>");

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
// Throws kCatalogMismatch if the file was written against another catalog.
Checkpoint load_checkpoint(const std::string& path, const DescriptorCatalog& catalog);

}  // namespace vtad

#endif  // VTAD_CHECKPOINT_H_
