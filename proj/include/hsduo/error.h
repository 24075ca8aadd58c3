/**
 * Copyright 2026 The hsduo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef _HSDUO_ERROR_H
#define _HSDUO_ERROR_H

#include <stdexcept>
#include <string>

namespace hsduo {

class Error: public std::runtime_error {
    public:
    using std::runtime_error::runtime_error;
};

/** Invalid experiment or node configuration (CLI exit code 2). */
class ConfigError: public Error {
    public:
    using Error::Error;
};

class DuplicateVote: public Error {
    public:
    using Error::Error;
};

class MixedVoteSet: public Error {
    public:
    using Error::Error;
};

class InsufficientQuorum: public Error {
    public:
    using Error::Error;
};

class InvalidSignature: public Error {
    public:
    using Error::Error;
};

class UnknownBlock: public Error {
    public:
    using Error::Error;
};

/** The run exceeded its view budget or ran out of events (CLI exit code 3). */
class LivenessFailure: public Error {
    public:
    using Error::Error;
};

class NoResults: public Error {
    public:
    using Error::Error;
};

class IoError: public Error {
    public:
    using Error::Error;
};

} // namespace hsduo

#endif
