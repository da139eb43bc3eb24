export {
  MatcherClient,
  type MatcherClientOptions,
} from "./client.js";
export {
  FrameDecoder,
  MatcherError,
  type MatchResult,
  OP_HUNGARIAN,
  OP_QMCMF,
  ProtocolError,
  type QMcmfRequest,
  RemoteMatcherError,
  decodeResponse,
  encodeFrame,
  encodeHungarianRequest,
  encodeQMcmfRequest,
} from "./protocol.js";
