use std::io::{self, Write};

/// Stdout that treats a closed pipe (e.g. `forktopo analyze ... | head`) as
/// the reader having seen enough rather than as an error.
struct PipeOut<W: Write>(W);

impl<W: Write> Write for PipeOut<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self.0.write(buf) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(buf.len()),
            other => other,
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self.0.flush() {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        }
    }
}

fn main() {
    let seed = std::env::var(forktopo_cli::SEED_ENV).ok();
    let mut out = PipeOut(io::stdout().lock());
    let code = forktopo_cli::run(std::env::args_os(), seed.as_deref(), &mut out, &mut io::stderr().lock());
    let _ = out.flush();
    std::process::exit(code);
}
