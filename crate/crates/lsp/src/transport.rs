//! LSP base protocol: `Content-Length: N\r\n\r\n` followed by N bytes of JSON.

use std::io::{self, BufRead, Write};

/// Reads one message body. `Ok(None)` on a clean end of stream.
pub fn read_message(reader: &mut impl BufRead) -> io::Result<Option<Vec<u8>>> {
    let mut length = None;
    let mut header = String::new();
    let mut saw_header = false;
    loop {
        header.clear();
        if reader.read_line(&mut header)? == 0 {
            if saw_header {
                return Err(invalid("stream ended inside a header"));
            }
            return Ok(None);
        }
        saw_header = true;
        let line = header.trim_end_matches(['\r', '\n']);
        if line.is_empty() {
            break;
        }
        let (name, value) = line
            .split_once(':')
            .ok_or_else(|| invalid(&format!("malformed header line {line:?}")))?;
        if name.trim().eq_ignore_ascii_case("content-length") {
            let n = value
                .trim()
                .parse::<usize>()
                .map_err(|_| invalid(&format!("bad Content-Length {value:?}")))?;
            length = Some(n);
        }
    }
    let length = length.ok_or_else(|| invalid("missing Content-Length header"))?;
    let mut body = vec![0; length];
    reader.read_exact(&mut body)?;
    Ok(Some(body))
}

pub fn write_message(writer: &mut (impl Write + ?Sized), body: &[u8]) -> io::Result<()> {
    write!(writer, "Content-Length: {}\r\n\r\n", body.len())?;
    writer.write_all(body)?;
    writer.flush()
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_round_trip() {
        let mut out = Vec::new();
        write_message(&mut out, br#"{"a":1}"#).unwrap();
        write_message(&mut out, b"{}").unwrap();
        assert_eq!(
            out,
            b"Content-Length: 7\r\n\r\n{\"a\":1}Content-Length: 2\r\n\r\n{}"
        );

        let mut reader = io::Cursor::new(out);
        assert_eq!(read_message(&mut reader).unwrap().unwrap(), br#"{"a":1}"#);
        assert_eq!(read_message(&mut reader).unwrap().unwrap(), b"{}");
        assert!(read_message(&mut reader).unwrap().is_none());
    }

    #[test]
    fn extra_headers_are_ignored() {
        let data = b"Content-Type: application/vscode-jsonrpc; charset=utf-8\r\nContent-Length: 2\r\n\r\n{}";
        let mut reader = io::Cursor::new(&data[..]);
        assert_eq!(read_message(&mut reader).unwrap().unwrap(), b"{}");
    }

    #[test]
    fn framing_errors() {
        let mut reader = io::Cursor::new(&b"Content-Type: x\r\n\r\n{}"[..]);
        assert!(read_message(&mut reader).is_err());
        let mut reader = io::Cursor::new(&b"Content-Length: ten\r\n\r\n"[..]);
        assert!(read_message(&mut reader).is_err());
        let mut reader = io::Cursor::new(&b"Content-Length: 10\r\n\r\n{}"[..]);
        assert!(read_message(&mut reader).is_err());
    }
}
