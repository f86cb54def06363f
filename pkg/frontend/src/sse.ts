/** Server-sent-events reader on top of fetch + ReadableStream.
 *
 * EventSource is browser-only and cannot be pointed at a stream that ends;
 * parsing the wire format by hand works in both the browser and node tests.
 */

export interface SseEvent {
  event: string;
  data: string;
}

export async function* readSse(
  url: string,
  signal?: AbortSignal,
): AsyncGenerator<SseEvent> {
  const response = await fetch(url, { signal, headers: { accept: 'text/event-stream' } });
  if (!response.ok || !response.body) {
    throw new Error(`event stream failed: ${response.status}`);
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  let buffer = '';
  let eventName = 'message';
  let dataLines: string[] = [];

  function* drain(chunk: string): Generator<SseEvent> {
    buffer += chunk;
    let nl: number;
    while ((nl = buffer.indexOf('\n')) >= 0) {
      const line = buffer.slice(0, nl).replace(/\r$/, '');
      buffer = buffer.slice(nl + 1);
      if (line === '') {
        if (dataLines.length > 0) {
          yield { event: eventName, data: dataLines.join('\n') };
        }
        eventName = 'message';
        dataLines = [];
      } else if (line.startsWith('event:')) {
        eventName = line.slice(6).trim();
      } else if (line.startsWith('data:')) {
        dataLines.push(line.slice(5).trimStart());
      }
      // comments and other fields are ignored
    }
  }

  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      yield* drain(decoder.decode(value, { stream: true }));
    }
    yield* drain('\n');
  } finally {
    reader.releaseLock();
  }
}
