/** Optimistic update helper: apply a local patch immediately, confirm with
 * the server, and roll back to the previous state on any refusal. */

export interface OptimisticOutcome<S, R> {
  state: S;
  confirmed: boolean;
  result?: R;
  error?: unknown;
}

export async function optimistic<S, R>(
  current: S,
  patch: (state: S) => S,
  confirm: () => Promise<R>,
): Promise<OptimisticOutcome<S, R>> {
  const patched = patch(current);
  try {
    const result = await confirm();
    return { state: patched, confirmed: true, result };
  } catch (error) {
    return { state: current, confirmed: false, error };
  }
}

/** View-state holder with subscriber notification; the controller routes
 * every mutation through `apply` so renders always see one coherent state. */
export class ViewState<S> {
  private listeners: Array<(state: S) => void> = [];

  constructor(private state: S) {}

  get(): S {
    return this.state;
  }

  set(next: S): void {
    this.state = next;
    for (const listener of this.listeners) listener(next);
  }

  subscribe(listener: (state: S) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  async apply<R>(
    patch: (state: S) => S,
    confirm: () => Promise<R>,
  ): Promise<OptimisticOutcome<S, R>> {
    const outcome = await optimistic(this.get(), patch, confirm);
    this.set(outcome.state);
    return outcome;
  }
}
